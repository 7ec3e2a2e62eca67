#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "kdvdelta/errors.hpp"
#include "kdvdelta/profile.hpp"

namespace kdvdelta {

using cplx = std::complex<double>;

/// Row-major 2x2 complex matrix.
struct Matrix2c {
  std::array<cplx, 4> a{};

  cplx& operator()(int i, int j) { return a[2 * i + j]; }
  const cplx& operator()(int i, int j) const { return a[2 * i + j]; }
  cplx det() const { return a[0] * a[3] - a[1] * a[2]; }
};

/// Scattering matrix S_L(k) = F_L ... F_1 with
/// F_n = I - (i U_n / 2k) [[1, -e^{2ikx_n}], [e^{-2ikx_n}, -1]].
///
/// The product is accumulated in a rescaled form so that exponentials never
/// overflow for |Im k| large. Throws DomainError for k == 0.
Matrix2c transfer_scattering(const DeltaProfile& profile, cplx k);

/// s11(iz) for real z > 0. Real by construction; the imaginary part of the
/// complex evaluation is checked against roundoff.
double s11_imag_axis(const DeltaProfile& profile, double z);

/// r_L(k) by the one-spike-at-a-time recursion starting from r_0 = 0.
cplx reflection_recursive(const DeltaProfile& profile, cplx k);

/// r(k) = s21/s11 from the transfer product, cross-checked against the
/// recursion. Throws PoleError at zeros of s11, DomainError at k == 0.
cplx reflection(const DeltaProfile& profile, cplx k);

/// Evaluators of s11, s21 and r bound to one profile.
class ScatteringData {
 public:
  explicit ScatteringData(DeltaProfile profile) : profile_(std::move(profile)) {}

  const DeltaProfile& profile() const { return profile_; }
  cplx s11(cplx k) const { return transfer_scattering(profile_, k)(0, 0); }
  cplx s21(cplx k) const { return transfer_scattering(profile_, k)(1, 0); }
  cplx r(cplx k) const { return reflection(profile_, k); }

 private:
  DeltaProfile profile_;
};

struct DiscreteSpectrum {
  std::vector<double> eigenvalues;      // z_j > 0, strictly increasing; k_j = i z_j
  std::vector<cplx> norming_constants;  // gamma_j = s21(i z_j) / s11'(i z_j)
  std::vector<std::string> warnings;    // near-tangent roots and similar
};

/// All zeros z > 0 of s11(iz), by a sampled scan plus bisection.
DiscreteSpectrum discrete_eigenvalues(const DeltaProfile& profile);

/// Threshold (sigma h)_l^L = 2 + 2 cos(l pi / L).
double soliton_threshold(int count, int l);

/// Number of bound states of the uniform lattice with L spikes.
/// Throws DomainError unless L >= 1 and sigma_h > 0.
int soliton_count_formula(int count, double sigma_h);

/// A_L(sigma h) from A_{L+2} + (sigma h - 2) A_{L+1} + A_L = 0,
/// A_1 = -1, A_2 = sigma h - 2.
double chebyshev_A(int count, double sigma_h);

}  // namespace kdvdelta
