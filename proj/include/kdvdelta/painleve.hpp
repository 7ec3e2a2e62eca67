#pragma once

#include <complex>
#include <vector>

#include "kdvdelta/errors.hpp"

namespace kdvdelta {

/// Jump data (p, q, r) of the Painleve II model problem.
struct StokesData {
  std::complex<double> p, q, r;

  /// p + q + r + pqr; zero for admissible data.
  std::complex<double> constraint() const { return p + q + r + p * q * r; }
};

/// (r0, -r0, 0) built from the reflection coefficient at k = 0.
StokesData stokes_from_r0(std::complex<double> r0);

/// y(s) solving y'' = s y + 2 y^3, tabulated on a descending grid.
struct PIISolution {
  std::vector<double> s;  // s[0] = s_max > s[1] > ... > s.back() = s_min
  std::vector<double> y;
  std::vector<double> y_prime;
  StokesData stokes;
  double rho = 0.0;  // y ~ rho Ai(s) as s -> +infinity
};

/// Integrates from s_max down to s_min starting from y = rho Ai, y' = rho Ai'
/// with an adaptive Dormand-Prince 5(4) scheme; samples every `step`.
/// Requires s_max >= 8, s_min < s_max, 0 < step <= 0.01.
/// Throws BlowUpError once |y| exceeds 1e6.
PIISolution solve_pii(double rho, double s_max, double s_min, double step,
                      StokesData stokes = stokes_from_r0(1.0));

/// y and y' at arbitrary s inside the grid, by cubic Hermite interpolation
/// (y' is interpolated with y'' taken from the ODE). Throws RangeError outside.
struct PIIPoint {
  double y;
  double y_prime;
};
PIIPoint pii_eval(const PIISolution& sol, double s);

/// y^2(s) + y'(s).
double pii_combination(const PIISolution& sol, double s);

/// Largest |y'' - s y - 2 y^3| over interior grid points, y'' from the
/// fourth-order five-point difference of the tabulated y.
double pii_residual(const PIISolution& sol);

}  // namespace kdvdelta
