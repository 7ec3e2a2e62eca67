#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "kdvdelta/errors.hpp"

// Special functions used by the region formulas. Everything here is
// self-contained double-precision code with no external math library.
namespace kdvdelta::specfun {

/// log Gamma(z) on the principal branch, continuous in the right half plane.
/// Lanczos approximation (g = 7, 9 terms) with upward recurrence for
/// Re z < 1/2.
std::complex<double> log_gamma(std::complex<double> z);

struct GammaArg {
  double arg;      // principal arg Gamma(i nu), in (-pi, pi]
  double log_abs;  // log |Gamma(i nu)|
};

/// arg and log-modulus of Gamma(i nu). Throws PoleError for nu == 0.
GammaArg gamma_arg_imag(double nu);

/// Airy function Ai(s) on the real line. Maclaurin series (extended
/// precision accumulation) on [-7.5, 5], asymptotic expansions outside.
double airy_ai(double s);
/// Ai'(s), same splitting as airy_ai.
double airy_ai_prime(double s);

/// Complete elliptic integral of the first kind in the parameter convention
/// K(m) = int_0^{pi/2} (1 - m sin^2 phi)^{-1/2} dphi, via the AGM.
/// Throws DomainError unless 0 <= m < 1.
double elliptic_K(double m);

/// Jacobi cn(u | m), parameter convention, via descending Landen / AGM.
/// Throws DomainError unless 0 <= m < 1.
double jacobi_cn(double u, double m);

/// Gauss-Legendre rule on [-1, 1].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule from Newton iteration on P_n.
QuadratureRule gauss_legendre(std::size_t n);

/// Shared immutable 16-point rule used by integrate().
const QuadratureRule& gauss_legendre_16();

/// Composite 16-point Gauss-Legendre over [a, b] split into equal panels.
/// Never evaluates f at a or b. Throws DomainError if a > b or panels == 0.
template <class F>
double integrate(F&& f, double a, double b, std::size_t panels) {
  if (!(a <= b)) throw DomainError("integrate: require a <= b");
  if (panels == 0) throw DomainError("integrate: panels must be positive");
  const QuadratureRule& rule = gauss_legendre_16();
  const double h = (b - a) / static_cast<double>(panels);
  double total = 0.0;
  for (std::size_t p = 0; p < panels; ++p) {
    const double mid = a + (static_cast<double>(p) + 0.5) * h;
    double panel = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      panel += rule.weights[i] * f(mid + 0.5 * h * rule.nodes[i]);
    }
    total += 0.5 * h * panel;
  }
  return total;
}

}  // namespace kdvdelta::specfun
