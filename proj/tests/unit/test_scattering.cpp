#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "kdvdelta/scattering.hpp"

using namespace kdvdelta;
using std::numbers::pi;

namespace {

DeltaProfile random_profile(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dl(1, 6);
  std::uniform_real_distribution<double> du(-5.0, 5.0), ds(0.1, 50.0 / 6.0);
  const int L = dl(rng);
  std::vector<Spike> v;
  double x = -10.0;
  for (int i = 0; i < L; ++i) {
    double u = du(rng);
    if (std::fabs(u) < 1e-3) u = 1.0;
    v.push_back({u, x});
    x += ds(rng);
  }
  return DeltaProfile(v);
}

// Product of the 2x2 factors taken literally, as an independent oracle.
Matrix2c naive_product(const DeltaProfile& p, cplx k) {
  const cplx i(0.0, 1.0);
  Matrix2c m;
  m(0, 0) = 1.0;
  m(1, 1) = 1.0;
  for (const Spike& s : p.spikes()) {
    const cplx a = i * s.amplitude / (2.0 * k);
    const cplx e = std::exp(2.0 * i * k * s.position);
    Matrix2c f;
    f(0, 0) = 1.0 - a;
    f(0, 1) = a * e;
    f(1, 0) = -a / e;
    f(1, 1) = 1.0 + a;
    Matrix2c r;
    for (int row = 0; row < 2; ++row)
      for (int col = 0; col < 2; ++col) r(row, col) = f(row, 0) * m(0, col) + f(row, 1) * m(1, col);
    m = r;
  }
  return m;
}

}  // namespace

TEST_CASE("single spike: closed-form s11 and reflection") {
  for (double u0 : {2.0, -2.0, 0.7}) {
    const DeltaProfile p = DeltaProfile::single(u0);
    for (double kr : {0.1, 1.0, 3.0}) {
      const cplx k(kr, 0.0), i(0.0, 1.0);
      CHECK(std::abs(transfer_scattering(p, k)(0, 0) - (1.0 - i * u0 / (2.0 * k))) < 1e-14);
      CHECK(std::abs(reflection(p, k) - i * u0 / (i * u0 - 2.0 * k)) < 1e-14);
    }
    CHECK(std::abs(reflection(p, cplx(1e-9, 0.0)) - 1.0) < 1e-8);
  }
  CHECK_THROWS_AS(transfer_scattering(DeltaProfile::single(1.0), 0.0), DomainError);
}

TEST_CASE("two spikes: closed-form s11") {
  const DeltaProfile p({{0.8, -1.0}, {1.7, 2.5}});
  const cplx i(0.0, 1.0);
  for (cplx k : {cplx(0.3, 0.0), cplx(1.1, 0.2), cplx(0.0, 0.9), cplx(-2.0, -0.3)}) {
    const cplx expect = 1.0 - i * 0.8 / (2.0 * k) - i * 1.7 / (2.0 * k) +
                        (i * 0.8) * (i * 1.7) / (4.0 * k * k) * (1.0 - std::exp(2.0 * i * k * 3.5));
    CHECK(std::abs(transfer_scattering(p, k)(0, 0) - expect) < 1e-13);
  }
}

TEST_CASE("rescaled product agrees with the literal product") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dk(-3.0, 3.0), di(-0.05, 0.05);
  for (int n = 0; n < 50; ++n) {
    const DeltaProfile p = random_profile(rng);
    const cplx k(dk(rng), di(rng));
    if (std::abs(k) < 0.05) continue;
    const Matrix2c a = transfer_scattering(p, k), b = naive_product(p, k);
    for (int q = 0; q < 4; ++q) CHECK(std::abs(a.a[q] - b.a[q]) < 1e-9 * (1.0 + std::abs(b.a[q])));
  }
}

TEST_CASE("recursion equals product and det S = 1 on random profiles") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dlog(std::log(0.01), std::log(100.0));
  std::bernoulli_distribution sign;
  for (int n = 0; n < 500; ++n) {
    const DeltaProfile p = random_profile(rng);
    const double k = (sign(rng) ? 1.0 : -1.0) * std::exp(dlog(rng));
    const Matrix2c s = transfer_scattering(p, k);
    const double scale = std::abs(s(0, 0) * s(1, 1)) + std::abs(s(0, 1) * s(1, 0));
    CHECK(std::abs(s.det() - 1.0) < 1e-12 * scale);
    const cplx r = s(1, 0) / s(0, 0);
    CHECK(std::abs(reflection_recursive(p, k) - r) < 1e-10 * std::max(1.0, std::abs(r)));
  }
}

TEST_CASE("reflection symmetry and unitarity on the real line") {
  const DeltaProfile p({{-1.5, 0.0}, {-0.5, 3.0}, {-2.0, 4.0}});
  for (double k = 0.05; k < 10.0; k *= 1.3) {
    const cplx r = reflection(p, k);
    CHECK(std::abs(reflection(p, -k) - std::conj(r)) < 1e-12);
    const double s11 = std::abs(transfer_scattering(p, k)(0, 0));
    CHECK(std::fabs(1.0 / (s11 * s11) - (1.0 - std::norm(r))) < 1e-10);
  }
}

TEST_CASE("s11 on the imaginary axis is real") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> dz(0.01, 5.0);
  for (int n = 0; n < 100; ++n) {
    const DeltaProfile p = random_profile(rng);
    const cplx s = transfer_scattering(p, cplx(0.0, dz(rng)))(0, 0);
    CHECK(std::fabs(s.imag()) < 1e-13 * std::max(1.0, std::fabs(s.real())));
  }
}

TEST_CASE("large k drives S to the identity") {
  const DeltaProfile p({{2.0, 0.0}, {-1.0, 1.0}});
  const Matrix2c s = transfer_scattering(p, 1e8);
  CHECK(std::abs(s(0, 0) - 1.0) < 1e-7);
  CHECK(std::abs(s(1, 0)) < 1e-7);
}

TEST_CASE("reflection at a bound state is a pole") {
  CHECK_THROWS_AS(reflection(DeltaProfile::single(2.0), cplx(0.0, 1.0)), PoleError);
}

TEST_CASE("single well: eigenvalue U/2 and norming constant -iU/2") {
  const DiscreteSpectrum s = discrete_eigenvalues(DeltaProfile::single(2.0));
  REQUIRE(s.eigenvalues.size() == 1);
  CHECK(s.eigenvalues[0] == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(std::abs(s.norming_constants[0] - cplx(0.0, -1.0)) < 1e-8);
  CHECK(discrete_eigenvalues(DeltaProfile::single(-2.0)).eigenvalues.empty());
}

TEST_CASE("two wells far apart carry two eigenvalues solving the L=2 equation") {
  const DiscreteSpectrum s = discrete_eigenvalues(DeltaProfile({{0.5, 20.0}, {0.5, 40.0}}));
  REQUIRE(s.eigenvalues.size() == 2);
  for (double z : s.eigenvalues) {
    const double lhs = (2.0 * z - 0.5) * (2.0 * z - 0.5);
    const double rhs = 0.25 * std::exp(2.0 * (20.0 - 40.0) * z);
    CHECK(std::fabs(lhs - rhs) < 1e-14);
  }
}

TEST_CASE("counting formula examples and thresholds") {
  CHECK(soliton_count_formula(3, 10.0) == 3);
  CHECK(soliton_count_formula(3, 2.0) == 2);
  CHECK(soliton_count_formula(3, 0.5) == 1);
  CHECK(soliton_count_formula(2, 4.0) ==
        static_cast<int>(discrete_eigenvalues(DeltaProfile::lattice(2, 4.0, 1.0)).eigenvalues.size()));
  CHECK_THROWS_AS(soliton_count_formula(3, 0.0), DomainError);
  CHECK_THROWS_AS(soliton_count_formula(0, 1.0), DomainError);
}

TEST_CASE("counting formula equals the eigenvalue scan off threshold") {
  for (int L = 1; L <= 6; ++L) {
    for (int i = 1; i <= 60; ++i) {
      const double sh = 0.1 * i;
      bool on = false;
      for (int l = 1; l < L; ++l) on = on || std::fabs(sh - soliton_threshold(L, l)) < 1e-9;
      if (on) continue;
      const auto n = discrete_eigenvalues(DeltaProfile::lattice(L, sh, 1.0)).eigenvalues.size();
      CHECK_MESSAGE(static_cast<int>(n) == soliton_count_formula(L, sh), "L=" << L << " sh=" << sh);
    }
  }
}

TEST_CASE("chebyshev recurrence: closed forms and threshold roots") {
  CHECK(chebyshev_A(1, 3.7) == -1.0);
  CHECK(chebyshev_A(2, 3.7) == doctest::Approx(1.7));
  for (double sh : {0.3, 1.0, 2.5}) CHECK(chebyshev_A(3, sh) == doctest::Approx(1.0 - (sh - 2.0) * (sh - 2.0)));
  for (int L = 2; L <= 12; ++L) {
    for (int l = 1; l < L; ++l) CHECK(std::fabs(chebyshev_A(L, soliton_threshold(L, l))) < 1e-10);
  }
}

TEST_CASE("lattice limits of the largest and smallest eigenvalue") {
  const int L = 3;
  const double h = 0.8;
  const DiscreteSpectrum tight = discrete_eigenvalues(DeltaProfile::lattice(L, h, 1e-4));
  REQUIRE(!tight.eigenvalues.empty());
  CHECK(std::fabs(tight.eigenvalues.back() - L * h / 2.0) < 1e-3);
  // Splitting decays like exp(-h sigma / 2); sigma = 25 keeps it resolvable.
  const DiscreteSpectrum sparse = discrete_eigenvalues(DeltaProfile::lattice(L, h, 25.0));
  REQUIRE(sparse.eigenvalues.size() == 3);
  for (double z : sparse.eigenvalues) CHECK(std::fabs(z - h / 2.0) < 1e-3);
}
