#pragma once

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kdvdelta/errors.hpp"
#include "kdvdelta/painleve.hpp"
#include "kdvdelta/profile.hpp"
#include "kdvdelta/scattering.hpp"

namespace kdvdelta {

enum class Region { Soliton, Decay, SelfSimilar, CollisionlessShock, DispersiveWave, TransitionT };

std::string to_string(Region region);

struct RegionThresholds {
  double epsilon_soliton = 0.5;  // half-width of |x/t - 4 z_j^2| < eps
  double C_pos = 1.0;            // Decay for x/t > C_pos
  double C_neg = 1.0;            // DispersiveWave for x/t < -C_neg
  double C_tau = 2.0;            // SelfSimilar for |t k0^3| < C_tau
  double C_shock = 4.0;          // shock strip constant, > 1

  /// Throws DomainError unless all positive and C_shock > 1.
  void validate() const;
};

/// How nu(k0) is built from 1 - |r(k0)|^2.
enum class NuConvention {
  NegHalfOverPi,      // -(1/2pi) log(1 - |r|^2), positive
  TheoremOverPi,      // (1/pi) log(1 - |r|^2)
  AppendixHalfOverPi  // (1/2pi) log(1 - |r|^2)
};

/// Whether the second argument of cn(.; alpha) and K(alpha) is the
/// parameter m = alpha or the modulus k = alpha (m = alpha^2).
enum class CnConvention { Parameter, Modulus };

std::string to_string(NuConvention c);
std::string to_string(CnConvention c);
NuConvention parse_nu_convention(const std::string& name);
CnConvention parse_cn_convention(const std::string& name);

struct RegionEvaluation {
  Region label = Region::TransitionT;
  std::optional<double> u;  // empty only for TransitionT
  std::map<std::string, double> diagnostics;
  std::vector<std::string> warnings;
};

/// Region label from the eigenvalues of the profile. Throws DomainError for t <= 0.
Region classify_region(const DiscreteSpectrum& spectrum, double x, double t,
                       const RegionThresholds& th = {});
Region classify_region(const DeltaProfile& profile, double x, double t,
                       const RegionThresholds& th = {});

/// Sum of sech^2 solitons, one per eigenvalue. Throws std::logic_error if
/// the spectrum is empty.
RegionEvaluation eval_soliton(const DiscreteSpectrum& spectrum, double x, double t);

/// nu from |r(k0)|^2 under a convention.
double nu_from_reflection(double r_abs2, NuConvention c);

/// chi(k0) = (1/2 pi i) int_{-k0}^{k0} log((1-|r(s)|^2)/(1-|r(k0)|^2)) ds/(s-k0).
/// Purely imaginary; `panels` scales the quadrature.
std::complex<double> chi_integral(const DeltaProfile& profile, double k0,
                                  std::size_t panels = 64);

/// Decaying oscillations for x < 0. Throws DomainError for x >= 0.
RegionEvaluation eval_dispersive(const DeltaProfile& profile, const DiscreteSpectrum& spectrum,
                                 double x, double t,
                                 NuConvention nu = NuConvention::NegHalfOverPi);
RegionEvaluation eval_dispersive(const DeltaProfile& profile, double x, double t,
                                 NuConvention nu = NuConvention::NegHalfOverPi);

/// (3t)^{-2/3} (y^2 + y')(x / (3t)^{1/3}). Throws RangeError off the grid.
RegionEvaluation eval_self_similar(const PIISolution& pii, double x, double t);

struct Modulation {
  double a;
  double b;
  double alpha;  // 1 - a^2/b^2
};

/// int_a^b sqrt((p^2-a^2)(b^2-p^2)) dp with b = sqrt(2 - a^2); decreasing on (0, 1).
double modulation_integral(double a);

/// Solves log(k0^2)/tau = -24 * modulation_integral(a) for a in (0, 1).
/// Throws ModulationError when no root exists.
Modulation solve_modulation(double k0, double tau);

/// Modulated cnoidal wave in the shock strip. gamma_param is the unspecified
/// constant inside log(2 gamma a^2 p^2).
RegionEvaluation eval_collisionless(const DeltaProfile& profile, double x, double t,
                                    double gamma_param = 1.0,
                                    CnConvention cn = CnConvention::Parameter);

/// Leading order is zero.
RegionEvaluation eval_decay(double x, double t);

struct AsymptoticOptions {
  RegionThresholds thresholds;
  NuConvention nu = NuConvention::NegHalfOverPi;
  CnConvention cn = CnConvention::Parameter;
  double gamma_param = 1.0;
  double pii_rho = -1.0;  // sign calibrated against the PDE oracle
  double pii_step = 0.005;
  double pii_s_max = 14.0;
  double pii_s_min = -6.0;
};

/// Region classification plus the matching formula, with the spectrum and
/// Painleve table computed once.
class AsymptoticEvaluator {
 public:
  AsymptoticEvaluator(DeltaProfile profile, AsymptoticOptions options = {});

  const DeltaProfile& profile() const { return profile_; }
  const DiscreteSpectrum& spectrum() const { return spectrum_; }
  const PIISolution& pii() const { return pii_; }
  const AsymptoticOptions& options() const { return options_; }

  Region classify(double x, double t) const;
  /// Evaluates the formula of the classified region. TransitionT yields an
  /// empty u.
  RegionEvaluation evaluate(double x, double t) const;
  /// Evaluates a specific region's formula regardless of classification.
  RegionEvaluation evaluate_as(Region region, double x, double t) const;

 private:
  DeltaProfile profile_;
  AsymptoticOptions options_;
  DiscreteSpectrum spectrum_;
  PIISolution pii_;
};

}  // namespace kdvdelta
