#pragma once

#include <cstddef>
#include <vector>

#include "kdvdelta/errors.hpp"
#include "kdvdelta/profile.hpp"

namespace kdvdelta {

/// Periodic grid x_j = -W + j dx, j = 0..n-1, dx = 2W/n.
struct Grid {
  double half_width = 0.0;
  std::size_t n_points = 0;

  /// Throws DomainError unless W > 0 and n is a power of two >= 4096.
  static Grid make(double half_width, std::size_t n_points);

  double dx() const { return 2.0 * half_width / static_cast<double>(n_points); }
  double x(std::size_t j) const { return -half_width + static_cast<double>(j) * dx(); }
  /// Largest retained wavenumber after 2/3-rule dealiasing.
  double k_cut() const;
};

struct FieldSnapshot {
  Grid grid;
  double t = 0.0;
  std::vector<double> u;
  double absorbed_mass = 0.0;  // cumulative trapezoid mass removed by the sponge
};

/// Rectangles of height U_n/width centred on x_n, cell-averaged onto the grid
/// and rescaled so each carries trapezoid mass exactly -U_n.
/// Requires width >= 2 dx, dx < min spacing / 8, disjoint supports and all
/// |x_n| <= W/2.
FieldSnapshot discretize_profile(const DeltaProfile& profile, const Grid& grid, double width);

struct EvolveOptions {
  std::vector<double> output_times;  // ascending, within (0, t_end]; t_end is always emitted
  bool dealias = true;
  bool adaptive = true;           // halve dt while 6 max|u| k_cut dt exceeds the bound
  bool sponge = true;             // absorbing layers near x = +-W
  double sponge_start = 0.85;     // fraction of W where the ramp is centred
  double sponge_ramp = 0.02;      // ramp width as a fraction of W
  double sponge_strength = 50.0;  // peak damping rate
};

/// Integrates u_t - 6 u u_x + u_xxx = 0 with an integrating-factor RK4
/// scheme (linear part exact, nonlinear term pseudo-spectral). Output times
/// are measured from u0.t. With `adaptive` off, throws DomainError if dt
/// violates the nonlinear stability bound for u0. Throws InstabilityError if
/// non-finite values appear.
std::vector<FieldSnapshot> evolve(const FieldSnapshot& u0, double t_end, double dt,
                                  const EvolveOptions& options = {});

/// Largest dt satisfying 6 max|u| k_cut dt <= safety * 0.4.
double stable_dt(const FieldSnapshot& snapshot, double safety = 0.5);

struct Conserved {
  double mass;  // trapezoid integral of u
  double l2;    // trapezoid integral of u^2
};

Conserved conserved(const FieldSnapshot& snapshot);

/// Band-limited interpolation onto a grid `factor` times finer (power of two).
FieldSnapshot spectral_refine(const FieldSnapshot& snapshot, std::size_t factor = 2);

/// Removes the modes that evolve() discards (|k| >= k_cut).
FieldSnapshot dealias_filter(const FieldSnapshot& snapshot);

/// Four-point cubic interpolation on the periodic grid.
double sample_cubic(const FieldSnapshot& snapshot, double x);

}  // namespace kdvdelta
