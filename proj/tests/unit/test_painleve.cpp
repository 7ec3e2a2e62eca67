#include <boost/math/special_functions/airy.hpp>

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "kdvdelta/painleve.hpp"

using namespace kdvdelta;

TEST_CASE("stokes data from r(0) = 1 satisfies the constraint") {
  const StokesData d = stokes_from_r0(1.0);
  CHECK(d.p == std::complex<double>(1.0, 0.0));
  CHECK(d.q == std::complex<double>(-1.0, 0.0));
  CHECK(d.r == std::complex<double>(0.0, 0.0));
  CHECK(std::abs(d.constraint()) < 1e-12);
}

TEST_CASE("rho = 0 gives the zero solution") {
  const PIISolution sol = solve_pii(0.0, 10.0, -4.0, 0.01);
  for (std::size_t i = 0; i < sol.y.size(); ++i) {
    CHECK(sol.y[i] == 0.0);
    CHECK(sol.y_prime[i] == 0.0);
  }
  CHECK(pii_combination(sol, 1.3) == 0.0);
}

TEST_CASE("grid is descending and covers the requested range") {
  const PIISolution sol = solve_pii(0.5, 12.0, -2.0, 0.01);
  CHECK(sol.s.front() == 12.0);
  CHECK(sol.s.back() == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(std::is_sorted(sol.s.rbegin(), sol.s.rend()));
  CHECK(sol.rho == 0.5);
}

TEST_CASE("linear regime: y(6) = rho Ai(6)") {
  const PIISolution sol = solve_pii(0.5, 14.0, -2.0, 0.005);
  const double y6 = pii_eval(sol, 6.0).y;
  CHECK(std::fabs(y6 / (0.5 * boost::math::airy_ai(6.0)) - 1.0) < 1e-6);
  CHECK(std::fabs(pii_combination(sol, 7.0) - 0.5 * boost::math::airy_ai_prime(7.0)) < 1e-5);
}

TEST_CASE("ODE residual below 1e-7 on [-2, 8]") {
  for (double rho : {0.1, 0.5, 1.0}) {
    const PIISolution sol = solve_pii(rho, 8.0, -2.0, 0.01);
    CHECK_MESSAGE(pii_residual(sol) < 1e-7, "rho = " << rho);
  }
}

TEST_CASE("step halving changes y by at most 1e-7 on [-2, 8]") {
  for (double rho : {-1.0, 0.5, 1.0}) {
    const PIISolution a = solve_pii(rho, 14.0, -2.0, 0.01);
    const PIISolution b = solve_pii(rho, 14.0, -2.0, 0.005);
    double d = 0.0;
    for (std::size_t i = 0; i < a.s.size(); ++i) d = std::max(d, std::fabs(a.y[i] - b.y[2 * i]));
    CHECK_MESSAGE(d <= 1e-7, "rho = " << rho);
    for (double s : {-1.3, 0.1, 2.7}) {
      CHECK(std::fabs(pii_combination(a, s) - pii_combination(b, s)) < 1e-6);
    }
  }
}

TEST_CASE("energy E = y'^2 - s y^2 - y^4 satisfies dE/ds = -y^2") {
  const PIISolution sol = solve_pii(1.0, 14.0, -4.0, 0.005);
  auto E = [&](std::size_t i) {
    const double y = sol.y[i];
    return sol.y_prime[i] * sol.y_prime[i] - sol.s[i] * y * y - y * y * y * y;
  };
  // Simpson's rule on pairs of descending intervals.
  const std::size_t n = sol.s.size() - 1;
  double worst = 0.0;
  for (std::size_t i = 0; i + 2 <= n; i += 2) {
    const double h = sol.s[i] - sol.s[i + 2];
    const double integral =
        h / 6.0 * (sol.y[i] * sol.y[i] + 4.0 * sol.y[i + 1] * sol.y[i + 1] + sol.y[i + 2] * sol.y[i + 2]);
    worst = std::max(worst, std::fabs((E(i) - E(i + 2)) + integral));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("interpolation errors and blow-up") {
  const PIISolution sol = solve_pii(0.5, 10.0, -2.0, 0.01);
  CHECK_THROWS_AS(pii_eval(sol, 10.5), RangeError);
  CHECK_THROWS_AS(pii_combination(sol, -2.5), RangeError);
  CHECK_THROWS_AS(solve_pii(2.0, 10.0, -8.0, 0.01), BlowUpError);
  CHECK_THROWS_AS(solve_pii(0.5, 7.0, -2.0, 0.01), DomainError);
  CHECK_THROWS_AS(solve_pii(0.5, 10.0, -2.0, 0.02), DomainError);
}

TEST_CASE("interpolated values agree with grid samples") {
  const PIISolution sol = solve_pii(1.0, 10.0, -3.0, 0.01);
  for (std::size_t i = 0; i < sol.s.size(); i += 97) {
    const PIIPoint p = pii_eval(sol, sol.s[i]);
    CHECK(p.y == doctest::Approx(sol.y[i]).epsilon(1e-12));
    CHECK(p.y_prime == doctest::Approx(sol.y_prime[i]).epsilon(1e-12));
  }
}
