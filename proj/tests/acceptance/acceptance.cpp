// Acceptance suite: one PASS/FAIL line per criterion. Optional arguments
// select criteria by number; the default runs all ten.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "kdvdelta/analysis.hpp"
#include "kdvdelta/asymptotics.hpp"
#include "kdvdelta/cli.hpp"
#include "kdvdelta/painleve.hpp"
#include "kdvdelta/pde.hpp"
#include "kdvdelta/scattering.hpp"

using namespace kdvdelta;
using kdvdelta::cli::RunConfig;
using std::numbers::pi;

namespace {

// Tolerances.
constexpr double kSolitonAmplitudeRel = 0.10;
constexpr double kSolitonPositionAbs = 1.0;
constexpr double kSolitonRuntime = 600.0;
constexpr double kWavenumberRel = 0.03;
constexpr double kEnvelopeRel = 0.15;
constexpr double kPhaseAnalytic = 1e-12;
constexpr double kPhasePdeRel = 0.10;
constexpr double kSelfSimilarLinf = 0.02;
constexpr double kCountingRuntime = 60.0;
constexpr double kThresholdRoot = 1e-8;
constexpr double kMultiAmplitudeRel = 0.10;
constexpr double kDistinctRel = 0.005;
constexpr double kWellFraction = 0.2;
constexpr double kIdentity = 1e-10;
constexpr double kPiiResidual = 1e-7;
constexpr double kPiiDrift = 1e-7;
constexpr double kPiiAiry = 1e-6;
constexpr double kMassDrift = 1e-8;
constexpr double kHalving = 1e-4;
constexpr double kModulationRoundTrip = 1e-8;

constexpr double kT = 50.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Single-spike run at t = 50 on a periodic grid with rectangle width 4 dx.
RunConfig single_config(double U, double half_width, std::size_t n, double dt,
                        std::pair<double, double> window) {
  RunConfig c;
  c.profile = DeltaProfile::single(U);
  c.t_values = {kT};
  c.grid.half_width = half_width;
  c.grid.n_points = n;
  c.grid.width_cells = 4.0;
  c.grid.dt = dt;
  c.grid.sponge = true;
  c.x_window = window;
  return c;
}

struct Run {
  RunConfig config;
  FieldSnapshot u0;
  FieldSnapshot final;
  double mass_drift;
  double seconds;
};

Run execute(const RunConfig& c) {
  const auto start = Clock::now();
  Run r{c, cli::initial_snapshot(c), {}, 0.0, 0.0};
  r.final = cli::run_pde(c, r.u0).back();
  const Conserved c0 = conserved(r.u0), c1 = conserved(r.final);
  r.mass_drift = std::fabs(c1.mass + r.final.absorbed_mass - c0.mass) / std::fabs(c0.mass);
  r.seconds = seconds_since(start);
  return r;
}

Peak deepest_well(const FieldSnapshot& s, double x_lo, double x_hi) {
  Peak best{0.0, 0.0};
  for (const Peak& w : find_wells(s, x_lo, x_hi, 0.0)) {
    if (w.value < best.value) best = w;
  }
  return best;
}

// Wells with x > 0 deeper than a fixed fraction of the deepest one.
std::vector<Peak> soliton_wells(const FieldSnapshot& s, double x_hi) {
  const std::vector<Peak> wells = find_wells(s, 0.0, x_hi, 0.0);
  double deepest = 0.0;
  for (const Peak& w : wells) deepest = std::min(deepest, w.value);
  std::vector<Peak> out;
  for (const Peak& w : wells) {
    if (w.value < kWellFraction * deepest) out.push_back(w);
  }
  return out;
}

class Suite {
 public:
  // Wide-domain runs for U = +2 and U = -2 used by criteria 2-4 and 10.
  const Run& wide(double U) {
    auto& slot = U > 0 ? wide_plus_ : wide_minus_;
    if (!slot) slot = execute(single_config(U, 1024.0, 32768, 1e-3, {-700.0, 250.0}));
    return *slot;
  }

  // Width study for U = 2 at W = 512: rectangle widths 0.5, 0.25, 0.125.
  const std::vector<Run>& width_study() {
    if (width_study_.empty()) {
      for (std::size_t n : {8192u, 16384u, 32768u}) {
        const double dt = 1e-3 * 16384.0 / static_cast<double>(n);
        width_study_.push_back(execute(single_config(2.0, 512.0, n, dt, {-400.0, 250.0})));
      }
    }
    return width_study_;
  }

  // Resolution gate at t = 50: dx and dt halved on a W = 256 domain with
  // the same dx, dt and rectangle width as the wide runs, then a
  // domain-independence check of each wide run against it. That check stays
  // within |x| <= 2W/3 of the proxy, clear of its absorbing layer.
  struct Gate {
    double U;
    cli::GateResult halving;
    double domain_change;
    bool passed;
  };

  static constexpr double kProxyInterior = 2.0 * 256.0 / 3.0;

  const std::vector<Gate>& gates() {
    if (gates_.empty()) {
      for (double U : {2.0, -2.0}) {
        const Run proxy = execute(single_config(U, 256.0, 8192, 1e-3, {-200.0, 150.0}));
        const cli::GateResult g = cli::resolution_gate(proxy.config, proxy.u0, proxy.final);
        const double dom = max_abs_difference(proxy.final, wide(U).final, -kProxyInterior, 150.0);
        gates_.push_back({U, g, dom, g.passed && dom < kHalving});
      }
    }
    return gates_;
  }

  bool gates_pass() {
    return std::all_of(gates().begin(), gates().end(), [](const Gate& g) { return g.passed; });
  }

  // Preset runs used by criterion 6, each with its own gate.
  struct Preset {
    std::string name;
    RunConfig config;
    FieldSnapshot final;
    cli::GateResult gate;
  };

  const Preset& preset(const std::string& name) {
    auto it = presets_.find(name);
    if (it == presets_.end()) {
      const RunConfig c = cli::parse_config(cli::preset(name));
      const FieldSnapshot u0 = cli::initial_snapshot(c);
      const FieldSnapshot f = cli::run_pde(c, u0).back();
      it = presets_.emplace(name, Preset{name, c, f, cli::resolution_gate(c, u0, f)}).first;
    }
    return it->second;
  }

  bool has_preset(const std::string& name) const { return presets_.count(name) != 0; }

  // Rectangle widths {2, 4, 8} dx at fixed dx = 1/16; the 4 dx run is shared
  // with the width study.
  const std::vector<Run>& fixed_dx_widths() {
    if (fixed_dx_.empty()) {
      for (double cells : {2.0, 4.0, 8.0}) {
        if (cells == 4.0) {
          fixed_dx_.push_back(width_study()[1]);
          continue;
        }
        RunConfig c = single_config(2.0, 512.0, 16384, 1e-3, {-400.0, 250.0});
        c.grid.width_cells = cells;
        fixed_dx_.push_back(execute(c));
      }
    }
    return fixed_dx_;
  }

 private:
  std::optional<Run> wide_plus_, wide_minus_;
  std::vector<Run> width_study_;
  std::vector<Run> fixed_dx_;
  std::vector<Gate> gates_;
  std::map<std::string, Preset> presets_;
};

const char* kGateFailed = "resolution gate failed; not evaluated";

Outcome criterion_soliton(Suite& suite) {
  if (!suite.gates_pass()) return {false, kGateFailed};
  const auto start = Clock::now();
  const std::vector<Run>& runs = suite.width_study();
  const double elapsed = seconds_since(start);
  std::vector<double> xs, amps;
  std::ostringstream d;
  for (const Run& r : runs) {
    const Peak p = deepest_well(r.final, 0.0, 0.8 * r.config.grid.half_width);
    xs.push_back(p.x);
    amps.push_back(-p.value);
    d << "w=" << fmt(4.0 * r.u0.grid.dx()) << ": x=" << fmt(p.x) << " A=" << fmt(-p.value) << "; ";
  }
  // Leading error is linear in the width, next term quadratic.
  const double x_ex = (8.0 * xs[2] - 6.0 * xs[1] + xs[0]) / 3.0;
  const double a_ex = (8.0 * amps[2] - 6.0 * amps[1] + amps[0]) / 3.0;
  const double U = 2.0;
  const double x_star = U * U * kT - std::log(2.0) / U;
  const double a_star = U * U / 2.0;
  const double a_err = std::fabs(a_ex - a_star) / a_star;
  const double x_err = std::fabs(x_ex - x_star);
  d << "extrapolated x=" << fmt(x_ex) << " (target " << fmt(x_star) << ", |dx|=" << fmt(x_err)
    << "), A=" << fmt(a_ex) << " (rel err " << fmt(a_err) << "), study " << fmt(elapsed) << " s";
  d << "; fixed dx=1/16 sensitivity (reported):";
  for (const Run& r : suite.fixed_dx_widths()) {
    const Peak p = deepest_well(r.final, 0.0, 0.8 * r.config.grid.half_width);
    d << " " << fmt(r.config.grid.width_cells) << "dx: x=" << fmt(p.x) << " A=" << fmt(-p.value);
  }
  return {a_err <= kSolitonAmplitudeRel && x_err <= kSolitonPositionAbs && elapsed < kSolitonRuntime,
          d.str()};
}

Outcome criterion_dispersive(Suite& suite) {
  if (!suite.gates_pass()) return {false, kGateFailed};
  bool pass = true;
  std::ostringstream d;
  for (double U : {2.0, -2.0}) {
    const Run& r = suite.wide(U);
    const DiscreteSpectrum spec = discrete_eigenvalues(r.config.profile);
    double kerr = 0.0, eerr = 0.0;
    std::size_t n = 0;
    for (const LocalWave& w : local_waves(r.final, -700.0, -200.0)) {
      const RegionEvaluation e = eval_dispersive(r.config.profile, spec, w.x, kT);
      kerr = std::max(kerr, std::fabs(w.wavenumber / (2.0 * e.diagnostics.at("k0")) - 1.0));
      eerr = std::max(eerr, std::fabs(w.envelope / e.diagnostics.at("amplitude") - 1.0));
      ++n;
    }
    pass = pass && n > 0 && kerr <= kWavenumberRel && eerr <= kEnvelopeRel;
    d << "U=" << fmt(U) << ": " << n << " periods, max k rel err " << fmt(kerr)
      << ", max envelope rel err " << fmt(eerr) << "; ";
  }
  return {pass, d.str()};
}

Outcome criterion_phase(Suite& suite) {
  if (!suite.gates_pass()) return {false, kGateFailed};
  std::ostringstream d;
  const double U = 2.0;
  const DeltaProfile plus = DeltaProfile::single(U), minus = DeltaProfile::single(-U);
  const DiscreteSpectrum sp = discrete_eigenvalues(plus), sm = discrete_eigenvalues(minus);
  double analytic = 0.0;
  for (double k0 : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    const double x = -12.0 * kT * k0 * k0;
    const double dphi = eval_dispersive(plus, sp, x, kT).diagnostics.at("phi") -
                        eval_dispersive(minus, sm, x, kT).diagnostics.at("phi");
    analytic = std::max(analytic, std::fabs(wrap_angle(dphi - 4.0 * std::atan(U / (2.0 * k0)))));
  }
  const cli::PhaseShift ps =
      cli::measure_phase_shift(suite.wide(U).config, suite.wide(U).final, suite.wide(-U).final, 1.0);
  const double pde_err = std::fabs(wrap_angle(ps.measured - ps.arctan_rule)) / ps.arctan_rule;
  const double pde_vs_formula = std::fabs(wrap_angle(ps.measured - ps.asymptotic));
  d << "analytic max |dphi - 4 atan| = " << fmt(analytic) << " rad; PDE at k0=1: measured "
    << fmt(ps.measured) << " rad vs 4 atan " << fmt(ps.arctan_rule) << " (rel err " << fmt(pde_err)
    << "), vs evaluator phases " << fmt(ps.asymptotic) << " (|diff| " << fmt(pde_vs_formula) << " rad)";
  return {analytic <= kPhaseAnalytic && pde_err <= kPhasePdeRel, d.str()};
}

Outcome criterion_self_similar(Suite& suite) {
  if (!suite.gates_pass()) return {false, kGateFailed};
  const double rho_default = AsymptoticOptions{}.pii_rho;
  bool pass = true;
  std::ostringstream d;
  for (double U : {2.0, -2.0}) {
    const Run& r = suite.wide(U);
    const std::vector<cli::RhoTrial> trials = cli::calibrate_rho(r.config, r.final);
    const auto best = std::min_element(trials.begin(), trials.end(),
                                       [](const auto& a, const auto& b) { return a.linf < b.linf; });
    pass = pass && best->rho == rho_default && best->linf < kSelfSimilarLinf;
    d << "U=" << fmt(U) << ":";
    for (const cli::RhoTrial& t : trials) d << " rho=" << fmt(t.rho) << " Linf=" << fmt(t.linf);
    d << "; ";
  }
  d << "frozen rho=" << fmt(rho_default);
  return {pass, d.str()};
}

Outcome criterion_counting(Suite&) {
  const auto start = Clock::now();
  std::size_t off = 0, agree = 0, on = 0;
  for (int L = 1; L <= 6; ++L) {
    for (int i = 1; i <= 60; ++i) {
      const double sh = 0.1 * i;
      bool at_threshold = false;
      for (int l = 1; l < L; ++l) at_threshold = at_threshold || std::fabs(sh - soliton_threshold(L, l)) < 1e-9;
      if (at_threshold) {
        ++on;
        continue;
      }
      ++off;
      const auto n = discrete_eigenvalues(DeltaProfile::lattice(L, sh, 1.0)).eigenvalues.size();
      if (static_cast<int>(n) == soliton_count_formula(L, sh)) ++agree;
    }
  }
  double worst_root = 0.0;
  bool sign_changes = true;
  for (int L = 2; L <= 6; ++L) {
    for (int l = 1; l < L; ++l) {
      const double th = soliton_threshold(L, l);
      worst_root = std::max(worst_root, std::fabs(chebyshev_A(L, th)));
      const double h = 1e-6;
      sign_changes = sign_changes && chebyshev_A(L, th - h) * chebyshev_A(L, th + h) < 0.0;
    }
  }
  const double elapsed = seconds_since(start);
  std::ostringstream d;
  d << agree << "/" << off << " off-threshold points agree (" << on << " on threshold); max |A_L| at "
    << "thresholds " << fmt(worst_root) << ", sign changes " << (sign_changes ? "all" : "missing")
    << "; " << fmt(elapsed) << " s";
  return {agree == off && worst_root < kThresholdRoot && sign_changes && elapsed < kCountingRuntime,
          d.str()};
}

Outcome criterion_multi(Suite& suite) {
  bool pass = true;
  std::ostringstream d;
  for (const char* name : {"fig9", "fig11"}) {
    const Suite::Preset& p = suite.preset(name);
    const std::size_t expected = p.config.profile.size();
    if (!p.gate.passed) {
      pass = false;
      d << name << ": gate failed (mass " << fmt(p.gate.mass_drift) << ", halving "
        << fmt(p.gate.halving_change) << "); ";
      continue;
    }
    const std::vector<Peak> wells = soliton_wells(p.final, p.config.x_window.second);
    const DiscreteSpectrum spec = discrete_eigenvalues(p.config.profile);
    d << name << ": " << wells.size() << " solitons, amplitudes";
    for (const Peak& w : wells) d << ' ' << fmt(-w.value) << "@" << fmt(w.x);
    d << ", predicted";
    for (double z : spec.eigenvalues) d << ' ' << fmt(2.0 * z * z);
    bool ok = wells.size() == expected && spec.eigenvalues.size() == expected;
    if (ok && expected == 2) {
      // Faster solitons are taller, so order by position matches ascending z.
      double worst = 0.0;
      for (std::size_t j = 0; j < expected; ++j) {
        const double a = 2.0 * spec.eigenvalues[j] * spec.eigenvalues[j];
        worst = std::max(worst, std::fabs(-wells[j].value / a - 1.0));
      }
      d << ", max rel err " << fmt(worst);
      ok = worst <= kMultiAmplitudeRel;
    }
    if (ok && expected == 3) {
      double closest = INFINITY;
      for (std::size_t i = 0; i < wells.size(); ++i) {
        for (std::size_t j = i + 1; j < wells.size(); ++j) {
          const double a = -wells[i].value, b = -wells[j].value;
          closest = std::min(closest, std::fabs(a - b) / std::max(a, b));
        }
      }
      d << ", closest pair rel diff " << fmt(closest);
      ok = closest > kDistinctRel;
    }
    pass = pass && ok;
    d << "; ";
  }
  return {pass, d.str()};
}

Outcome criterion_scattering(Suite&) {
  std::vector<DeltaProfile> profiles{DeltaProfile::single(-2.0), DeltaProfile::lattice(3, -0.5, 20.0),
                                     DeltaProfile({{-1.0, -3.0}, {-4.0, 0.5}, {-0.2, 2.0}})};
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> dl(1, 6);
  std::uniform_real_distribution<double> du(0.05, 5.0), ds(0.1, 8.0);
  for (int i = 0; i < 20; ++i) {
    std::vector<Spike> v;
    double x = -10.0;
    for (int n = dl(rng); n > 0; --n) {
      v.push_back({-du(rng), x});
      x += ds(rng);
    }
    profiles.emplace_back(v);
  }
  double det = 0.0, rec = 0.0, trans = 0.0;
  for (const DeltaProfile& p : profiles) {
    for (int i = 0; i <= 400; ++i) {
      const double k = 0.01 * std::pow(1000.0, i / 400.0);
      for (double kk : {k, -k}) {
        const Matrix2c s = transfer_scattering(p, kk);
        const double scale = std::abs(s(0, 0) * s(1, 1)) + std::abs(s(0, 1) * s(1, 0));
        det = std::max(det, std::abs(s.det() - 1.0) / scale);
        const cplx r = reflection(p, kk);
        rec = std::max(rec, std::abs(reflection_recursive(p, kk) - r));
        trans = std::max(trans, std::fabs(1.0 / std::norm(s(0, 0)) - (1.0 - std::norm(r))));
      }
    }
  }
  std::ostringstream d;
  d << profiles.size() << " barrier profiles, k in +-[0.01, 10]: det rel dev " << fmt(det)
    << ", recursion diff " << fmt(rec) << ", transmission consistency " << fmt(trans);
  return {det < kIdentity && rec < kIdentity && trans < kIdentity, d.str()};
}

Outcome criterion_painleve(Suite&) {
  bool pass = true;
  std::ostringstream d;
  for (double rho : {AsymptoticOptions{}.pii_rho, 1.0, 0.5}) {
    RunConfig c;
    c.asym.pii_rho = rho;
    const AsymptoticEvaluator ev(c.profile, c.asym);
    const cli::json s = cli::pii_suite(ev, c);
    const double res = s["residual"], drift = s["step_halving_drift"], airy = s["airy_relative_deviation_s_ge_6"];
    pass = pass && res < kPiiResidual && drift < kPiiDrift && airy < kPiiAiry;
    d << "rho=" << fmt(rho) << ": residual " << fmt(res) << ", drift " << fmt(drift) << ", Airy "
      << fmt(airy) << "; ";
  }
  return {pass, d.str()};
}

Outcome criterion_gates(Suite& suite) {
  bool pass = true;
  std::ostringstream d;
  for (const Suite::Gate& g : suite.gates()) {
    const bool ok = g.passed && g.halving.mass_drift < kMassDrift;
    pass = pass && ok;
    d << "U=" << fmt(g.U) << ": mass " << fmt(g.halving.mass_drift) << ", halving "
      << fmt(g.halving.halving_change) << ", domain on [-170.7, 150] " << fmt(g.domain_change) << "; ";
  }
  if (!suite.width_study().empty()) {
    for (const Run& r : suite.width_study()) {
      pass = pass && r.mass_drift < kMassDrift;
      d << "width study n=" << r.config.grid.n_points << " mass " << fmt(r.mass_drift) << "; ";
    }
  }
  for (const char* name : {"fig9", "fig11"}) {
    if (!suite.has_preset(name)) continue;
    const cli::GateResult& g = suite.preset(name).gate;
    pass = pass && g.passed;
    d << name << ": mass " << fmt(g.mass_drift) << ", halving " << fmt(g.halving_change) << "; ";
  }
  return {pass, d.str()};
}

Outcome criterion_shock(Suite& suite) {
  bool pass = true;
  std::ostringstream d;
  const AsymptoticOptions opts;
  // Round trip through the forward map of the modulation equation.
  double round_trip = 0.0;
  for (double a = 0.05; a < 0.96; a += 0.05) {
    for (double k0 : {0.2, 0.5, 0.8}) {
      const double tau = -std::log(k0 * k0) / (24.0 * modulation_integral(a));
      round_trip = std::max(round_trip, std::fabs(solve_modulation(k0, tau).a - a));
    }
  }
  pass = round_trip < kModulationRoundTrip;
  d << "modulation round trip " << fmt(round_trip) << "; ";
  const auto [lo, hi] = cli::shock_strip(opts.thresholds, kT);
  for (double U : {2.0, -2.0}) {
    const Run& r = suite.wide(U);
    std::size_t ok = 0, failed = 0, other = 0, unbounded = 0;
    double pde_linf = 0.0;
    for (std::size_t j = 0; j < r.final.u.size(); ++j) {
      const double x = r.final.grid.x(j);
      if (x < lo || x > hi) continue;
      try {
        const RegionEvaluation e = eval_collisionless(r.config.profile, x, kT, opts.gamma_param, opts.cn);
        const double bound = -2.0 * x / (3.0 * kT) * std::fabs(e.diagnostics.at("A"));
        if (!std::isfinite(*e.u) || std::fabs(*e.u) > bound * (1.0 + 1e-12)) ++unbounded;
        pde_linf = std::max(pde_linf, std::fabs(*e.u - r.final.u[j]));
        ++ok;
      } catch (const ModulationError&) {
        ++failed;
      } catch (const std::exception&) {
        ++other;
      }
    }
    pass = pass && ok > 0 && unbounded == 0 && other == 0;
    d << "U=" << fmt(U) << ": strip [" << fmt(lo) << ", " << fmt(hi) << "] " << ok << " evaluated, "
      << failed << " outside modulation range, " << unbounded << " unbounded, " << other
      << " other errors, PDE Linf " << fmt(pde_linf) << " (reported); ";
  }
  return {pass, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome(Suite&)>>> criteria{
      {"soliton region", criterion_soliton},
      {"dispersive region", criterion_dispersive},
      {"phase shift", criterion_phase},
      {"self-similar region", criterion_self_similar},
      {"soliton counting", criterion_counting},
      {"multi-soliton", criterion_multi},
      {"scattering identities", criterion_scattering},
      {"Painleve II suite", criterion_painleve},
      {"PDE oracle gates", criterion_gates},
      {"collisionless shock", criterion_shock},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::stoi(argv[i]));
  Suite suite;
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto start = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second(suite);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s %2d %s (%.1f s): %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                seconds_since(start), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
