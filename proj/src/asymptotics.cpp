#include "kdvdelta/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "kdvdelta/specfun.hpp"

namespace kdvdelta {

namespace {

using std::numbers::pi;

double log_one_minus_r2(const DeltaProfile& profile, double k) {
  // 1 - |r|^2 = 1/|s11|^2 on the real line; avoids cancellation when |r| ~ 1.
  return -2.0 * std::log(std::abs(transfer_scattering(profile, cplx(k, 0.0))(0, 0)));
}

double nu_from_log(double log_rho, NuConvention c) {
  switch (c) {
    case NuConvention::NegHalfOverPi:
      return -log_rho / (2.0 * pi);
    case NuConvention::TheoremOverPi:
      return log_rho / pi;
    case NuConvention::AppendixHalfOverPi:
      return log_rho / (2.0 * pi);
  }
  throw std::logic_error("nu_from_log: unknown convention");
}

double sech2(double v) {
  const double c = std::cosh(v);
  return std::isfinite(c) ? 1.0 / (c * c) : 0.0;
}

}  // namespace

std::string to_string(Region region) {
  switch (region) {
    case Region::Soliton:
      return "Soliton";
    case Region::Decay:
      return "Decay";
    case Region::SelfSimilar:
      return "SelfSimilar";
    case Region::CollisionlessShock:
      return "CollisionlessShock";
    case Region::DispersiveWave:
      return "DispersiveWave";
    case Region::TransitionT:
      return "TransitionT";
  }
  return "?";
}

std::string to_string(NuConvention c) {
  switch (c) {
    case NuConvention::NegHalfOverPi:
      return "neg_half_over_pi";
    case NuConvention::TheoremOverPi:
      return "theorem_over_pi";
    case NuConvention::AppendixHalfOverPi:
      return "appendix_half_over_pi";
  }
  return "?";
}

std::string to_string(CnConvention c) {
  return c == CnConvention::Parameter ? "parameter" : "modulus";
}

NuConvention parse_nu_convention(const std::string& name) {
  if (name == "neg_half_over_pi") return NuConvention::NegHalfOverPi;
  if (name == "theorem_over_pi") return NuConvention::TheoremOverPi;
  if (name == "appendix_half_over_pi") return NuConvention::AppendixHalfOverPi;
  throw DomainError("unknown nu convention '" + name + "'");
}

CnConvention parse_cn_convention(const std::string& name) {
  if (name == "parameter") return CnConvention::Parameter;
  if (name == "modulus") return CnConvention::Modulus;
  throw DomainError("unknown cn convention '" + name + "'");
}

void RegionThresholds::validate() const {
  if (!(epsilon_soliton > 0.0 && C_pos > 0.0 && C_neg > 0.0 && C_tau > 0.0)) {
    throw DomainError("RegionThresholds: all thresholds must be positive");
  }
  if (!(C_shock > 1.0)) throw DomainError("RegionThresholds: C_shock must exceed 1");
}

Region classify_region(const DiscreteSpectrum& spectrum, double x, double t,
                       const RegionThresholds& th) {
  if (!(t > 0.0)) throw DomainError("classify_region: require t > 0");
  th.validate();
  const double v = x / t;
  for (double z : spectrum.eigenvalues) {
    if (std::fabs(v - 4.0 * z * z) < th.epsilon_soliton) return Region::Soliton;
  }
  if (v > th.C_pos) return Region::Decay;
  const double k0 = std::sqrt(std::fabs(x) / (12.0 * t));
  if (t * k0 * k0 * k0 < th.C_tau) return Region::SelfSimilar;
  if (x < 0.0 && t > 1.0) {
    const double w = -x / (std::cbrt(3.0 * t) * std::pow(std::log(t), 2.0 / 3.0));
    if (w > 1.0 / th.C_shock && w < th.C_shock) return Region::CollisionlessShock;
  }
  if (v < -th.C_neg) return Region::DispersiveWave;
  return x > 0.0 ? Region::Decay : Region::TransitionT;
}

Region classify_region(const DeltaProfile& profile, double x, double t,
                       const RegionThresholds& th) {
  return classify_region(discrete_eigenvalues(profile), x, t, th);
}

RegionEvaluation eval_soliton(const DiscreteSpectrum& spectrum, double x, double t) {
  if (spectrum.eigenvalues.empty()) {
    throw std::logic_error("eval_soliton: spectrum has no eigenvalues");
  }
  RegionEvaluation ev;
  ev.label = Region::Soliton;
  const std::size_t n = spectrum.eigenvalues.size();
  double u = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double kappa = spectrum.eigenvalues[j];
    const cplx c = cplx(0.0, 1.0) * spectrum.norming_constants[j];
    if (std::fabs(c.imag()) > 1e-6 * std::abs(c) || c.real() < 0.0) {
      std::ostringstream msg;
      msg << "norming constant " << j << ": i*gamma = " << c << " is not real positive; modulus used";
      ev.warnings.push_back(msg.str());
    }
    double prod = 1.0;
    for (std::size_t m = j + 1; m < n; ++m) {
      const double zm = spectrum.eigenvalues[m];
      const double q = (zm - kappa) / (zm + kappa);
      prod *= q * q;
    }
    const double shift = 0.5 * std::log(std::abs(c) / (2.0 * kappa) * prod);
    const double arg = kappa * x - 4.0 * kappa * kappa * kappa * t - shift;
    u += -2.0 * kappa * kappa * sech2(arg);
    const std::string tag = std::to_string(j + 1);
    ev.diagnostics["z_" + tag] = kappa;
    ev.diagnostics["center_" + tag] = 4.0 * kappa * kappa * t + shift / kappa;
    ev.diagnostics["amplitude_" + tag] = 2.0 * kappa * kappa;
  }
  ev.u = u;
  return ev;
}

double nu_from_reflection(double r_abs2, NuConvention c) {
  if (!(r_abs2 >= 0.0 && r_abs2 < 1.0)) {
    throw SpectralError("nu_from_reflection: require 0 <= |r|^2 < 1");
  }
  return nu_from_log(std::log1p(-r_abs2), c);
}

std::complex<double> chi_integral(const DeltaProfile& profile, double k0, std::size_t panels) {
  if (!(k0 > 0.0)) throw DomainError("chi_integral: require k0 > 0");
  const double span = profile.rightmost() - profile.leftmost();
  panels += static_cast<std::size_t>(std::ceil(2.0 * k0 * span));
  const double ref = log_one_minus_r2(profile, k0);
  auto ratio = [&](double s) { return log_one_minus_r2(profile, s) - ref; };

  // s = k0 w^4 on [0, k0) and s = -k0 w^4 on (-k0, 0]; the map absorbs the
  // logarithmic singularity of log(1 - |r|^2) at s = 0.
  constexpr double kSliver = 1e-6;
  const double w_top = std::pow(1.0 - kSliver, 0.25);
  const double right = specfun::integrate(
      [&](double w) {
        const double w4 = w * w * w * w;
        return 4.0 * w * w * w * ratio(k0 * w4) / (w4 - 1.0);
      },
      0.0, w_top, panels);
  const double left = specfun::integrate(
      [&](double w) {
        const double w4 = w * w * w * w;
        return -4.0 * w * w * w * ratio(-k0 * w4) / (w4 + 1.0);
      },
      0.0, 1.0, panels);
  // Integrand tends to d/ds log(1-|r|^2) at s = k0; sliver by that limit.
  const double h = 1e-4 * k0;
  const double slope = (log_one_minus_r2(profile, k0 + h) - log_one_minus_r2(profile, k0 - h)) /
                       (2.0 * h);
  const double sliver = slope * kSliver * k0;
  const double total = right + left + sliver;
  return {0.0, -total / (2.0 * pi)};
}

RegionEvaluation eval_dispersive(const DeltaProfile& profile, const DiscreteSpectrum& spectrum,
                                 double x, double t, NuConvention conv) {
  if (!(x < 0.0)) throw DomainError("eval_dispersive: require x < 0");
  if (!(t > 0.0)) throw DomainError("eval_dispersive: require t > 0");
  RegionEvaluation ev;
  ev.label = Region::DispersiveWave;
  const double k0 = std::sqrt(-x / (12.0 * t));
  const cplx r = reflection(profile, cplx(k0, 0.0));
  const double r_abs2 = std::norm(r);
  if (!(1.0 - r_abs2 > 0.0)) throw SpectralError("eval_dispersive: |r(k0)| >= 1");
  const double log_rho = log_one_minus_r2(profile, k0);
  const double nu = nu_from_log(log_rho, conv);
  if (nu < 0.0) {
    ev.warnings.push_back("nu < 0 under convention " + to_string(conv) +
                          "; |nu| used in the amplitude");
  }
  const specfun::GammaArg g = specfun::gamma_arg_imag(nu);
  const cplx chi = chi_integral(profile, k0);
  const double chi_term = (-2.0 * cplx(0.0, 1.0) * chi).real();
  double bound_states = 0.0;
  for (double z : spectrum.eigenvalues) bound_states += 4.0 * std::atan(z / k0);
  const double phi = pi / 4.0 - std::arg(r) + g.arg + chi_term + bound_states;
  const double tau = t * k0 * k0 * k0;
  const double phase = 16.0 * tau - nu * std::log(192.0 * tau) + phi;
  const double amplitude = std::sqrt(4.0 * std::fabs(nu) * k0 / (3.0 * t));
  ev.u = amplitude * std::sin(phase);
  ev.diagnostics = {{"k0", k0},
                    {"nu", nu},
                    {"phi", phi},
                    {"chi", chi.imag()},
                    {"tau", tau},
                    {"r_abs2", r_abs2},
                    {"arg_r", std::arg(r)},
                    {"arg_gamma", g.arg},
                    {"bound_state_phase", bound_states},
                    {"amplitude", amplitude},
                    {"phase", phase}};
  return ev;
}

RegionEvaluation eval_dispersive(const DeltaProfile& profile, double x, double t,
                                 NuConvention conv) {
  return eval_dispersive(profile, discrete_eigenvalues(profile), x, t, conv);
}

RegionEvaluation eval_self_similar(const PIISolution& pii, double x, double t) {
  if (!(t > 0.0)) throw DomainError("eval_self_similar: require t > 0");
  RegionEvaluation ev;
  ev.label = Region::SelfSimilar;
  const double scale = std::cbrt(3.0 * t);
  const double s = x / scale;
  ev.u = pii_combination(pii, s) / (scale * scale);
  const double k0 = std::sqrt(std::fabs(x) / (12.0 * t));
  ev.diagnostics = {{"s", s}, {"k0", k0}, {"tau", (x <= 0.0 ? 1.0 : -1.0) * t * k0 * k0 * k0}};
  return ev;
}

double modulation_integral(double a) {
  if (!(a >= 0.0 && a <= 1.0)) throw DomainError("modulation_integral: require 0 <= a <= 1");
  const double b = std::sqrt(2.0 - a * a);
  const double d = b - a;
  // p = a + (b - a) sin^2(phi) removes both square-root endpoints.
  const double val = specfun::integrate(
      [&](double phi) {
        const double sn = std::sin(phi), cs = std::cos(phi);
        const double p = a + d * sn * sn;
        return sn * sn * cs * cs * std::sqrt((p + a) * (p + b));
      },
      0.0, pi / 2.0, 8);
  return 2.0 * d * d * val;
}

Modulation solve_modulation(double k0, double tau) {
  if (!(k0 > 0.0 && k0 < 1.0)) throw ModulationError("solve_modulation: require 0 < k0 < 1");
  if (!(tau > 0.0)) throw ModulationError("solve_modulation: require tau > 0");
  const double target = -std::log(k0 * k0) / (24.0 * tau);
  const double top = modulation_integral(0.0);
  if (!(target < top)) {
    std::ostringstream msg;
    msg << "solve_modulation: no a in (0,1) for k0 = " << k0 << ", tau = " << tau;
    throw ModulationError(msg.str());
  }
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (modulation_integral(mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double a = 0.5 * (lo + hi);
  const double b = std::sqrt(2.0 - a * a);
  return {a, b, 1.0 - a * a / (b * b)};
}

RegionEvaluation eval_collisionless(const DeltaProfile& /*profile*/, double x, double t,
                                    double gamma_param, CnConvention cn) {
  if (!(x < 0.0)) throw DomainError("eval_collisionless: require x < 0");
  if (!(t > std::numbers::e)) throw DomainError("eval_collisionless: require t > e");
  if (!(gamma_param > 0.0)) throw DomainError("eval_collisionless: gamma_param must be positive");
  RegionEvaluation ev;
  ev.label = Region::CollisionlessShock;
  const double k0 = std::sqrt(-x / (12.0 * t));
  const double tau = t * k0 * k0 * k0;
  const Modulation mod = solve_modulation(k0, tau);
  const double a = mod.a, b = mod.b, alpha = mod.alpha;
  const double m = cn == CnConvention::Parameter ? alpha : alpha * alpha;
  const double K = specfun::elliptic_K(m);

  // p = a sin(phi): both factors of (p^2-a^2)(p^2-b^2) are negative on (0, a).
  const double theta_int = specfun::integrate(
      [&](double phi) {
        const double c = std::cos(phi), sn = std::sin(phi);
        return a * a * c * c * std::sqrt(b * b - a * a * sn * sn);
      },
      0.0, pi / 2.0, 16);
  const double theta = 12.0 * tau / pi * theta_int;

  const double beta = (a / b) * (a / b);
  const double c = std::sqrt(b / a) - 1.0;
  // p = 1 + c w^2 removes the inverse square root at p = 1.
  const double second = specfun::integrate(
      [&](double w) {
        const double p = 1.0 + c * w * w;
        const double rest = 1.0 - beta * p * p;
        if (!(rest > 0.0)) throw std::logic_error("eval_collisionless: integrand sign violation");
        return 2.0 * std::sqrt(c) / std::sqrt((p + 1.0) * rest);
      },
      0.0, 1.0, 32);
  // p = sin(phi) on the even integrand; log(sin^2) split off analytically
  // using int_0^{pi/2} log(sin^2 phi) dphi = -pi log 2.
  const double log_part = specfun::integrate(
      [&](double phi) {
        const double sn = std::sin(phi);
        return std::log(sn * sn) * (1.0 / std::sqrt(1.0 - beta * sn * sn) - 1.0);
      },
      0.0, pi / 2.0, 64);
  const double third = 2.0 * (std::log(2.0 * gamma_param * a * a) * specfun::elliptic_K(beta) +
                              log_part - pi * std::log(2.0));
  const double theta0 = K - second - third / (2.0 * pi);

  const double A = 0.25 * (b * b - 1.0);
  const double B = 0.5 * (1.0 - b * b);
  if (std::fabs(B + 2.0 * A) > 1e-14) throw std::logic_error("eval_collisionless: B != -2A");
  const double cnv = specfun::jacobi_cn(2.0 * K * theta + theta0, m);
  ev.u = -(2.0 * x / (3.0 * t)) * (A + B * cnv * cnv);
  ev.diagnostics = {{"k0", k0},    {"tau", tau},       {"a", a},   {"b", b},
                    {"alpha", alpha}, {"m", m},        {"K", K},   {"A", A},
                    {"B", B},      {"theta", theta},   {"theta0", theta0},
                    {"gamma_param", gamma_param}};
  return ev;
}

RegionEvaluation eval_decay(double /*x*/, double t) {
  if (!(t > 0.0)) throw DomainError("eval_decay: require t > 0");
  RegionEvaluation ev;
  ev.label = Region::Decay;
  ev.u = 0.0;
  return ev;
}

AsymptoticEvaluator::AsymptoticEvaluator(DeltaProfile profile, AsymptoticOptions options)
    : profile_(std::move(profile)), options_(options) {
  options_.thresholds.validate();
  spectrum_ = discrete_eigenvalues(profile_);
  // r(0) as the small-k limit on the real line.
  const cplx r0 = reflection(profile_, cplx(1e-7, 0.0));
  const StokesData stokes = stokes_from_r0(r0);
  const double s_max = std::max(8.0, options_.pii_s_max);
  double s_min = options_.pii_s_min;
  for (int attempt = 0;; ++attempt) {
    try {
      pii_ = solve_pii(options_.pii_rho, s_max, s_min, options_.pii_step, stokes);
      break;
    } catch (const BlowUpError& e) {
      if (attempt >= 8) throw;
      s_min = e.s() + 1.0;
      if (!(s_min < s_max - 1.0)) throw;
    }
  }
}

Region AsymptoticEvaluator::classify(double x, double t) const {
  return classify_region(spectrum_, x, t, options_.thresholds);
}

RegionEvaluation AsymptoticEvaluator::evaluate(double x, double t) const {
  return evaluate_as(classify(x, t), x, t);
}

RegionEvaluation AsymptoticEvaluator::evaluate_as(Region region, double x, double t) const {
  switch (region) {
    case Region::Soliton:
      return eval_soliton(spectrum_, x, t);
    case Region::Decay:
      return eval_decay(x, t);
    case Region::SelfSimilar:
      return eval_self_similar(pii_, x, t);
    case Region::CollisionlessShock:
      return eval_collisionless(profile_, x, t, options_.gamma_param, options_.cn);
    case Region::DispersiveWave:
      return eval_dispersive(profile_, spectrum_, x, t, options_.nu);
    case Region::TransitionT: {
      RegionEvaluation ev;
      ev.label = Region::TransitionT;
      return ev;
    }
  }
  throw std::logic_error("evaluate_as: unknown region");
}

}  // namespace kdvdelta
