#include "kdvdelta/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "kdvdelta/painleve.hpp"
#include "kdvdelta/scattering.hpp"
#include "kdvdelta/specfun.hpp"

namespace kdvdelta::cli {

namespace fs = std::filesystem;
using std::numbers::pi;

namespace {

// ---------------------------------------------------------------- parsing

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
  throw ConfigError("field '" + field + "': " + what);
}

void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
  if (!obj.is_object()) field_error(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) field_error(path.empty() ? key : path + "." + key, "unknown field");
  }
}

double get_real(const json& v, const std::string& field) {
  if (!v.is_number()) field_error(field, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) field_error(field, "must be finite");
  return d;
}

double get_positive(const json& v, const std::string& field) {
  const double d = get_real(v, field);
  if (!(d > 0.0)) field_error(field, "must be positive");
  return d;
}

std::size_t get_count(const json& v, const std::string& field) {
  if (!v.is_number_integer() || v.get<long long>() <= 0) {
    field_error(field, "expected a positive integer");
  }
  return static_cast<std::size_t>(v.get<long long>());
}

bool get_bool(const json& v, const std::string& field) {
  if (!v.is_boolean()) field_error(field, "expected true or false");
  return v.get<bool>();
}

// Profile literal: [{"U": real, "x": real}, ...] sorted by x.
DeltaProfile parse_literal(const json& arr) {
  if (arr.empty()) field_error("profile", "expected a nonempty array");
  std::vector<Spike> spikes;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string f = "profile[" + std::to_string(i) + "]";
    check_keys(arr[i], f, {"U", "x"});
    if (!arr[i].contains("U") || !arr[i].contains("x")) field_error(f, "needs U and x");
    const double x = get_real(arr[i]["x"], f + ".x");
    if (!spikes.empty() && !(x > spikes.back().position)) field_error(f + ".x", "must ascend");
    spikes.push_back({get_real(arr[i]["U"], f + ".U"), x});
  }
  return DeltaProfile(std::move(spikes));
}

DeltaProfile parse_profile(const json& p) {
  if (p.is_array()) {
    try {
      return parse_literal(p);
    } catch (const DomainError& e) {
      field_error("profile", e.what());
    }
  }
  check_keys(p, "profile", {"spikes", "single", "lattice"});
  if (p.size() != 1) field_error("profile", "give exactly one of spikes, single, lattice");
  try {
    if (p.contains("single")) {
      const json& s = p["single"];
      check_keys(s, "profile.single", {"amplitude", "position"});
      if (!s.contains("amplitude")) field_error("profile.single.amplitude", "missing");
      const double u = get_real(s["amplitude"], "profile.single.amplitude");
      const double x = s.contains("position") ? get_real(s["position"], "profile.single.position")
                                              : 0.0;
      return DeltaProfile::single(u, x);
    }
    if (p.contains("lattice")) {
      const json& l = p["lattice"];
      check_keys(l, "profile.lattice", {"count", "h", "sigma"});
      for (const char* k : {"count", "h", "sigma"}) {
        if (!l.contains(k)) field_error(std::string("profile.lattice.") + k, "missing");
      }
      const auto count = get_count(l["count"], "profile.lattice.count");
      return DeltaProfile::lattice(static_cast<int>(count), get_real(l["h"], "profile.lattice.h"),
                                   get_positive(l["sigma"], "profile.lattice.sigma"));
    }
    const json& arr = p["spikes"];
    if (!arr.is_array() || arr.empty()) field_error("profile.spikes", "expected a nonempty array");
    std::vector<Spike> spikes;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string f = "profile.spikes[" + std::to_string(i) + "]";
      check_keys(arr[i], f, {"amplitude", "position"});
      if (!arr[i].contains("amplitude") || !arr[i].contains("position")) {
        field_error(f, "needs amplitude and position");
      }
      spikes.push_back({get_real(arr[i]["amplitude"], f + ".amplitude"),
                        get_real(arr[i]["position"], f + ".position")});
    }
    return DeltaProfile(std::move(spikes));
  } catch (const DomainError& e) {
    field_error("profile", e.what());
  }
}

// Line and column of a byte offset, for syntax errors.
std::string locate(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

// ---------------------------------------------------------------- output

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::string time_tag(double t) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "t%g", t);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

json profile_json(const DeltaProfile& p) {
  json arr = json::array();
  for (const Spike& s : p.spikes()) arr.push_back({{"U", s.amplitude}, {"x", s.position}});
  return arr;
}

json spectrum_json(const DiscreteSpectrum& s) {
  json arr = json::array();
  for (std::size_t j = 0; j < s.eigenvalues.size(); ++j) {
    arr.push_back({{"z", s.eigenvalues[j]},
                   {"gamma_re", s.norming_constants[j].real()},
                   {"gamma_im", s.norming_constants[j].imag()},
                   {"soliton_amplitude", 2.0 * s.eigenvalues[j] * s.eigenvalues[j]},
                   {"soliton_speed", 4.0 * s.eigenvalues[j] * s.eigenvalues[j]}});
  }
  return {{"eigenvalues", arr}, {"warnings", s.warnings}};
}

json header(const RunConfig& config, const std::string& verb) {
  return {{"verb", verb}, {"config", config_to_json(config)}, {"config_hash", config_hash(config)}};
}

// Uniform lattice parameters if the profile is one, for the counting theorem.
std::optional<std::pair<int, double>> lattice_sigma_h(const DeltaProfile& p) {
  const double h = p[0].amplitude;
  if (!(h > 0.0)) return std::nullopt;
  if (p.size() == 1) return std::make_pair(1, h * 1.0);
  const double sigma = p[1].position - p[0].position;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i].amplitude != h) return std::nullopt;
    if (i > 0 && std::fabs(p[i].position - p[i - 1].position - sigma) > 1e-12 * sigma) {
      return std::nullopt;
    }
  }
  return std::make_pair(static_cast<int>(p.size()), sigma * h);
}

std::vector<double> sweep(double lo, double hi, double step) {
  std::vector<double> xs;
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
  for (std::size_t i = 0; i <= n; ++i) xs.push_back(lo + step * static_cast<double>(i));
  return xs;
}

std::string sanitize(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

struct Sample {
  Region label;
  std::optional<double> u;
  std::map<std::string, double> diagnostics;
  std::string error;
};

Sample sample_asymptotics(const AsymptoticEvaluator& ev, double x, double t) {
  Sample s{ev.classify(x, t), std::nullopt, {}, {}};
  try {
    RegionEvaluation r = ev.evaluate_as(s.label, x, t);
    s.u = r.u;
    s.diagnostics = std::move(r.diagnostics);
  } catch (const std::exception& e) {
    s.error = sanitize(e.what());
  }
  return s;
}

double diag(const Sample& s, const std::string& key, bool& present) {
  auto it = s.diagnostics.find(key);
  present = it != s.diagnostics.end();
  return present ? it->second : 0.0;
}

}  // namespace

std::pair<double, double> shock_strip(const RegionThresholds& th, double t) {
  const double scale = std::cbrt(3.0 * t) * std::pow(std::log(t), 2.0 / 3.0);
  return {-th.C_shock * scale, -scale / th.C_shock};
}

json pii_suite(const AsymptoticEvaluator& ev, const RunConfig& config) {
  const PIISolution& sol = ev.pii();
  json out = {{"rho", sol.rho}, {"s_max", sol.s.front()}, {"s_min", sol.s.back()},
              {"step", config.asym.pii_step}};
  // Residual and step-halving drift on [-2, 8], where the solution is stable.
  const double lo = std::max(-2.0, sol.s.back()), hi = 8.0;
  PIISolution trimmed;
  trimmed.rho = sol.rho;
  trimmed.stokes = sol.stokes;
  for (std::size_t i = 0; i < sol.s.size(); ++i) {
    if (sol.s[i] <= hi + 1e-12 && sol.s[i] >= lo - 1e-12) {
      trimmed.s.push_back(sol.s[i]);
      trimmed.y.push_back(sol.y[i]);
      trimmed.y_prime.push_back(sol.y_prime[i]);
    }
  }
  out["residual_window"] = {lo, hi};
  out["residual"] = pii_residual(trimmed);
  const PIISolution half =
      solve_pii(sol.rho, sol.s.front(), lo, 0.5 * config.asym.pii_step, sol.stokes);
  double drift = 0.0;
  for (double s : trimmed.s) drift = std::max(drift, std::fabs(pii_eval(half, s).y - pii_eval(sol, s).y));
  out["step_halving_drift"] = drift;
  double airy = 0.0;
  for (double s = 6.0; s <= std::min(8.0, sol.s.front()); s += 0.5) {
    airy = std::max(airy, std::fabs(pii_eval(sol, s).y / (sol.rho * specfun::airy_ai(s)) - 1.0));
  }
  out["airy_relative_deviation_s_ge_6"] = airy;
  return out;
}

// ---------------------------------------------------------------- config

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("syntax error at " + locate(text, e.byte == 0 ? 0 : e.byte - 1) + ": " +
                      e.what());
  }
  return parse_config(doc);
}

RunConfig parse_config(const json& doc) {
  check_keys(doc, "",
             {"profile", "t_values", "x_window", "x_step", "grid", "pii", "thresholds",
              "gamma_param", "nu_convention", "cn_convention", "scatter", "phase_diagram", "gate",
              "mirror", "soliton_refinement", "refinement_half_width"});
  RunConfig c;
  if (doc.contains("profile")) c.profile = parse_profile(doc["profile"]);
  if (doc.contains("t_values")) {
    const json& ts = doc["t_values"];
    if (!ts.is_array() || ts.empty()) field_error("t_values", "expected a nonempty array");
    c.t_values.clear();
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const double t = get_positive(ts[i], "t_values[" + std::to_string(i) + "]");
      if (!c.t_values.empty() && !(t > c.t_values.back())) field_error("t_values", "must ascend");
      c.t_values.push_back(t);
    }
  }
  if (doc.contains("x_window")) {
    const json& w = doc["x_window"];
    if (!w.is_array() || w.size() != 2) field_error("x_window", "expected [lo, hi]");
    c.x_window = {get_real(w[0], "x_window[0]"), get_real(w[1], "x_window[1]")};
    if (!(c.x_window.first < c.x_window.second)) field_error("x_window", "must be nonempty");
  }
  if (doc.contains("x_step")) c.x_step = get_positive(doc["x_step"], "x_step");
  if (doc.contains("grid")) {
    const json& g = doc["grid"];
    check_keys(g, "grid", {"half_width", "n_points", "width_cells", "dt", "sponge"});
    if (g.contains("half_width")) c.grid.half_width = get_positive(g["half_width"], "grid.half_width");
    if (g.contains("n_points")) c.grid.n_points = get_count(g["n_points"], "grid.n_points");
    if (g.contains("width_cells")) {
      c.grid.width_cells = get_positive(g["width_cells"], "grid.width_cells");
      if (c.grid.width_cells < 2.0) field_error("grid.width_cells", "must be at least 2");
    }
    if (g.contains("dt")) c.grid.dt = get_positive(g["dt"], "grid.dt");
    if (g.contains("sponge")) c.grid.sponge = get_bool(g["sponge"], "grid.sponge");
  }
  try {
    Grid::make(c.grid.half_width, c.grid.n_points);
  } catch (const DomainError& e) {
    field_error("grid", e.what());
  }
  if (doc.contains("pii")) {
    const json& p = doc["pii"];
    check_keys(p, "pii", {"step", "s_max", "s_min", "rho"});
    if (p.contains("step")) {
      c.asym.pii_step = get_positive(p["step"], "pii.step");
      if (c.asym.pii_step > 0.01) field_error("pii.step", "must not exceed 0.01");
    }
    if (p.contains("s_max")) {
      c.asym.pii_s_max = get_real(p["s_max"], "pii.s_max");
      if (c.asym.pii_s_max < 8.0) field_error("pii.s_max", "must be at least 8");
    }
    if (p.contains("s_min")) c.asym.pii_s_min = get_real(p["s_min"], "pii.s_min");
    if (p.contains("rho")) c.asym.pii_rho = get_real(p["rho"], "pii.rho");
    if (!(c.asym.pii_s_min < c.asym.pii_s_max)) field_error("pii.s_min", "must be below s_max");
  }
  if (doc.contains("thresholds")) {
    const json& th = doc["thresholds"];
    check_keys(th, "thresholds", {"epsilon_soliton", "C_pos", "C_neg", "C_tau", "C_shock"});
    RegionThresholds& r = c.asym.thresholds;
    if (th.contains("epsilon_soliton")) r.epsilon_soliton = get_real(th["epsilon_soliton"], "thresholds.epsilon_soliton");
    if (th.contains("C_pos")) r.C_pos = get_real(th["C_pos"], "thresholds.C_pos");
    if (th.contains("C_neg")) r.C_neg = get_real(th["C_neg"], "thresholds.C_neg");
    if (th.contains("C_tau")) r.C_tau = get_real(th["C_tau"], "thresholds.C_tau");
    if (th.contains("C_shock")) r.C_shock = get_real(th["C_shock"], "thresholds.C_shock");
    try {
      r.validate();
    } catch (const DomainError& e) {
      field_error("thresholds", e.what());
    }
  }
  if (doc.contains("gamma_param")) c.asym.gamma_param = get_positive(doc["gamma_param"], "gamma_param");
  try {
    if (doc.contains("nu_convention")) {
      if (!doc["nu_convention"].is_string()) field_error("nu_convention", "expected a string");
      c.asym.nu = parse_nu_convention(doc["nu_convention"].get<std::string>());
    }
    if (doc.contains("cn_convention")) {
      if (!doc["cn_convention"].is_string()) field_error("cn_convention", "expected a string");
      c.asym.cn = parse_cn_convention(doc["cn_convention"].get<std::string>());
    }
  } catch (const DomainError& e) {
    throw ConfigError(std::string("field convention: ") + e.what());
  }
  if (doc.contains("scatter")) {
    const json& s = doc["scatter"];
    check_keys(s, "scatter", {"k_min", "k_max", "k_count"});
    if (s.contains("k_min")) c.scatter.k_min = get_positive(s["k_min"], "scatter.k_min");
    if (s.contains("k_max")) c.scatter.k_max = get_positive(s["k_max"], "scatter.k_max");
    if (s.contains("k_count")) c.scatter.k_count = get_count(s["k_count"], "scatter.k_count");
    if (!(c.scatter.k_min < c.scatter.k_max)) field_error("scatter", "k_min must be below k_max");
  }
  if (doc.contains("phase_diagram")) {
    const json& p = doc["phase_diagram"];
    check_keys(p, "phase_diagram", {"counts", "sigma_h_min", "sigma_h_max", "sigma_h_count"});
    if (p.contains("counts")) {
      if (!p["counts"].is_array() || p["counts"].empty()) field_error("phase_diagram.counts", "expected a nonempty array");
      c.phase_diagram.counts.clear();
      for (const json& v : p["counts"]) {
        c.phase_diagram.counts.push_back(static_cast<int>(get_count(v, "phase_diagram.counts")));
      }
    }
    if (p.contains("sigma_h_min")) c.phase_diagram.sigma_h_min = get_positive(p["sigma_h_min"], "phase_diagram.sigma_h_min");
    if (p.contains("sigma_h_max")) c.phase_diagram.sigma_h_max = get_positive(p["sigma_h_max"], "phase_diagram.sigma_h_max");
    if (p.contains("sigma_h_count")) c.phase_diagram.sigma_h_count = get_count(p["sigma_h_count"], "phase_diagram.sigma_h_count");
    if (!(c.phase_diagram.sigma_h_min < c.phase_diagram.sigma_h_max)) {
      field_error("phase_diagram", "sigma_h_min must be below sigma_h_max");
    }
  }
  if (doc.contains("gate")) c.gate = get_bool(doc["gate"], "gate");
  if (doc.contains("mirror")) c.mirror = get_bool(doc["mirror"], "mirror");
  if (doc.contains("soliton_refinement")) {
    const json& r = doc["soliton_refinement"];
    if (!r.is_array()) field_error("soliton_refinement", "expected an array of point counts");
    for (std::size_t i = 0; i < r.size(); ++i) {
      const std::string f = "soliton_refinement[" + std::to_string(i) + "]";
      c.soliton_refinement.push_back(get_count(r[i], f));
      if (i > 0 && c.soliton_refinement[i] != 2 * c.soliton_refinement[i - 1]) {
        field_error(f, "each entry must double the previous one");
      }
    }
  }
  if (doc.contains("refinement_half_width")) {
    c.refinement_half_width = get_positive(doc["refinement_half_width"], "refinement_half_width");
  }
  return c;
}

json config_to_json(const RunConfig& c) {
  const RegionThresholds& th = c.asym.thresholds;
  return {
      {"profile", profile_json(c.profile)},
      {"t_values", c.t_values},
      {"x_window", {c.x_window.first, c.x_window.second}},
      {"x_step", c.x_step},
      {"grid",
       {{"half_width", c.grid.half_width},
        {"n_points", c.grid.n_points},
        {"width_cells", c.grid.width_cells},
        {"dt", c.grid.dt},
        {"sponge", c.grid.sponge}}},
      {"pii",
       {{"step", c.asym.pii_step},
        {"s_max", c.asym.pii_s_max},
        {"s_min", c.asym.pii_s_min},
        {"rho", c.asym.pii_rho}}},
      {"thresholds",
       {{"epsilon_soliton", th.epsilon_soliton},
        {"C_pos", th.C_pos},
        {"C_neg", th.C_neg},
        {"C_tau", th.C_tau},
        {"C_shock", th.C_shock}}},
      {"gamma_param", c.asym.gamma_param},
      {"nu_convention", to_string(c.asym.nu)},
      {"cn_convention", to_string(c.asym.cn)},
      {"scatter",
       {{"k_min", c.scatter.k_min}, {"k_max", c.scatter.k_max}, {"k_count", c.scatter.k_count}}},
      {"phase_diagram",
       {{"counts", c.phase_diagram.counts},
        {"sigma_h_min", c.phase_diagram.sigma_h_min},
        {"sigma_h_max", c.phase_diagram.sigma_h_max},
        {"sigma_h_count", c.phase_diagram.sigma_h_count}}},
      {"gate", c.gate},
      {"mirror", c.mirror},
      {"soliton_refinement", c.soliton_refinement},
      {"refinement_half_width", c.refinement_half_width},
  };
}

std::string config_hash(const RunConfig& config) {
  const std::string text = config_to_json(config).dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------- presets

std::vector<std::string> preset_names() {
  return {"fig4", "fig6a", "fig7", "fig9", "fig10", "fig11", "scattering", "painleve", "shock"};
}

json preset(const std::string& name) {
  const json single_plus = {{"single", {{"amplitude", 2.0}, {"position", 0.0}}}};
  const json single_minus = {{"single", {{"amplitude", -2.0}, {"position", 0.0}}}};
  const json wide = {{"half_width", 1024.0}, {"n_points", 32768}, {"width_cells", 4.0}, {"dt", 1e-3}};
  if (name == "fig4") {
    return {{"profile", single_plus}, {"t_values", {50.0}}, {"x_window", {-700.0, 250.0}},
            {"grid", wide}, {"gate", true}, {"mirror", true}};
  }
  if (name == "fig7") {
    return {{"profile", single_minus}, {"t_values", {50.0}}, {"x_window", {-700.0, 250.0}},
            {"grid", wide}, {"gate", true}};
  }
  if (name == "fig6a") {
    return {{"profile", single_plus},
            {"t_values", {50.0}},
            {"x_window", {-400.0, 250.0}},
            {"grid", {{"half_width", 512.0}, {"n_points", 16384}, {"width_cells", 4.0}, {"dt", 1e-3}}},
            {"gate", true},
            {"soliton_refinement", {8192, 16384, 32768}},
            {"refinement_half_width", 512.0}};
  }
  if (name == "fig9") {
    return {{"profile",
             {{"spikes", {{{"amplitude", 0.5}, {"position", 20.0}}, {{"amplitude", 0.5}, {"position", 40.0}}}}}},
            {"t_values", {100.0}},
            {"x_window", {-150.0, 150.0}},
            {"grid", {{"half_width", 256.0}, {"n_points", 8192}, {"width_cells", 4.0}, {"dt", 2e-3}}},
            {"gate", true}};
  }
  if (name == "fig11") {
    return {{"profile", {{"lattice", {{"count", 3}, {"h", 0.5}, {"sigma", 20.0}}}}},
            {"t_values", {100.0}},
            {"x_window", {-150.0, 150.0}},
            {"grid", {{"half_width", 256.0}, {"n_points", 8192}, {"width_cells", 4.0}, {"dt", 2e-3}}},
            {"gate", true}};
  }
  if (name == "fig10") {
    return {{"profile", {{"lattice", {{"count", 3}, {"h", 0.5}, {"sigma", 20.0}}}}},
            {"phase_diagram",
             {{"counts", {1, 2, 3, 4, 5, 6}}, {"sigma_h_min", 0.1}, {"sigma_h_max", 6.0}, {"sigma_h_count", 60}}}};
  }
  if (name == "scattering") {
    return {{"profile", single_minus}, {"scatter", {{"k_min", 0.01}, {"k_max", 10.0}, {"k_count", 200}}}};
  }
  if (name == "painleve") {
    return {{"profile", single_plus}, {"t_values", {50.0}}, {"x_window", {-10.0, 12.0}}, {"x_step", 0.05}};
  }
  if (name == "shock") {
    return {{"profile", single_plus}, {"t_values", {50.0}}, {"x_window", {-60.0, 0.0}}, {"x_step", 0.05}};
  }
  throw ConfigError("unknown preset '" + name + "'");
}

// ---------------------------------------------------------------- building blocks

FieldSnapshot initial_snapshot(const RunConfig& config) {
  try {
    const Grid g = Grid::make(config.grid.half_width, config.grid.n_points);
    return discretize_profile(config.profile, g, config.grid.width_cells * g.dx());
  } catch (const DomainError& e) {
    field_error("grid", e.what());
  }
}

std::vector<FieldSnapshot> run_pde(const RunConfig& config, const FieldSnapshot& u0) {
  EvolveOptions opts;
  opts.output_times = config.t_values;
  opts.sponge = config.grid.sponge;
  return evolve(u0, config.t_values.back(), config.grid.dt, opts);
}

GateResult resolution_gate(const RunConfig& config, const FieldSnapshot& u0,
                           const FieldSnapshot& coarse_final) {
  GateResult g{};
  const Conserved c0 = conserved(u0), c1 = conserved(coarse_final);
  g.mass_drift = std::fabs(c1.mass + coarse_final.absorbed_mass - c0.mass) / std::fabs(c0.mass);
  g.l2_drift = std::fabs(c1.l2 - c0.l2) / c0.l2;
  // Same band-limited initial data on a grid twice as fine, with dt halved.
  const FieldSnapshot fine0 = spectral_refine(dealias_filter(u0), 2);
  EvolveOptions opts;
  opts.sponge = config.grid.sponge;
  const double t_end = coarse_final.t - u0.t;
  const FieldSnapshot fine = evolve(fine0, t_end, 0.5 * config.grid.dt, opts).back();
  g.halving_change =
      max_abs_difference(coarse_final, fine, config.x_window.first, config.x_window.second);
  g.passed = g.mass_drift < 1e-8 && g.halving_change < 1e-4;
  return g;
}

std::vector<RhoTrial> calibrate_rho(const RunConfig& config, const FieldSnapshot& pde, double s_lo,
                                    double s_hi) {
  std::vector<RhoTrial> out;
  const double t = pde.t;
  const double scale = std::cbrt(3.0 * t);
  for (double rho : {1.0, -1.0}) {
    const PIISolution sol = solve_pii(rho, std::max(8.0, config.asym.pii_s_max),
                                      std::min(s_lo - 0.5, config.asym.pii_s_min),
                                      config.asym.pii_step);
    double linf = 0.0;
    for (std::size_t j = 0; j < pde.u.size(); ++j) {
      const double s = pde.grid.x(j) / scale;
      if (s < s_lo || s > s_hi) continue;
      linf = std::max(linf, std::fabs(*eval_self_similar(sol, pde.grid.x(j), t).u - pde.u[j]));
    }
    out.push_back({rho, linf});
  }
  return out;
}

PhaseShift measure_phase_shift(const RunConfig& config, const FieldSnapshot& plus,
                               const FieldSnapshot& minus, double k0) {
  const double t = plus.t;
  const double xc = -12.0 * t * k0 * k0;
  const double period = pi / k0;  // local wavelength 2 pi / (2 k0)
  PhaseShift ps{};
  ps.k0 = k0;
  ps.lag = correlation_lag(plus, minus, xc - 1.5 * period, xc + 1.5 * period, period);
  auto unwrap = [](double a) {
    double r = std::fmod(a, 2.0 * pi);
    return r < 0.0 ? r + 2.0 * pi : r;
  };
  // u(x) ~ A sin(Phi - 2 k0 (x - xc)) locally, so the lag maps to -2 k0 lag.
  ps.measured = unwrap(-2.0 * k0 * ps.lag);
  const DeltaProfile& p = config.profile;
  std::vector<Spike> mirrored(p.spikes().begin(), p.spikes().end());
  for (Spike& s : mirrored) s.amplitude = -s.amplitude;
  const DeltaProfile pm(mirrored);
  const double phi_p =
      eval_dispersive(p, discrete_eigenvalues(p), xc, t, config.asym.nu).diagnostics.at("phi");
  const double phi_m =
      eval_dispersive(pm, discrete_eigenvalues(pm), xc, t, config.asym.nu).diagnostics.at("phi");
  ps.asymptotic = unwrap(phi_p - phi_m);
  ps.arctan_rule = 4.0 * std::atan(std::fabs(p[0].amplitude) / (2.0 * k0));
  return ps;
}

std::vector<RegionMetric> region_metrics(const std::vector<double>& x,
                                         const std::vector<Region>& labels,
                                         const std::vector<double>& u_pde,
                                         const std::vector<std::optional<double>>& u_asym) {
  std::vector<RegionMetric> out;
  std::size_t i = 0;
  while (i < x.size()) {
    std::size_t j = i;
    while (j + 1 < x.size() && labels[j + 1] == labels[i]) ++j;
    RegionMetric m{labels[i], x[i], x[j], 0, 0.0, 0.0};
    const double buffer = 0.05 * (x[j] - x[i]);
    double sum = 0.0;
    for (std::size_t q = i; q <= j; ++q) {
      if (x[q] < x[i] + buffer || x[q] > x[j] - buffer || !u_asym[q]) continue;
      const double e = std::fabs(u_pde[q] - *u_asym[q]);
      m.linf = std::max(m.linf, e);
      const double w = q + 1 < x.size() ? x[q + 1] - x[q] : (q > 0 ? x[q] - x[q - 1] : 0.0);
      sum += e * e * w;
      ++m.samples;
    }
    m.l2 = std::sqrt(sum);
    out.push_back(m);
    i = j + 1;
  }
  return out;
}

// ---------------------------------------------------------------- verbs

json cmd_phase_diagram(const RunConfig& config, const fs::path& out) {
  fs::create_directories(out);
  const PhaseDiagramKnobs& pd = config.phase_diagram;
  std::ostringstream csv;
  csv << "L,sigma_h,count_formula,count_scan,on_threshold,agree\n";
  std::size_t off = 0, off_agree = 0, on = 0;
  json thresholds = json::array();
  for (int L : pd.counts) {
    for (int l = 1; l < L; ++l) {
      const double th = soliton_threshold(L, l);
      thresholds.push_back({{"L", L}, {"l", l}, {"sigma_h", th}, {"A_L", chebyshev_A(L, th)}});
    }
    for (std::size_t i = 0; i < pd.sigma_h_count; ++i) {
      const double sh = pd.sigma_h_count == 1
                            ? pd.sigma_h_min
                            : pd.sigma_h_min + (pd.sigma_h_max - pd.sigma_h_min) *
                                                   static_cast<double>(i) /
                                                   static_cast<double>(pd.sigma_h_count - 1);
      bool on_threshold = false;
      for (int l = 1; l < L; ++l) {
        if (std::fabs(sh - soliton_threshold(L, l)) < 1e-9) on_threshold = true;
      }
      const int formula = soliton_count_formula(L, sh);
      const int scan =
          static_cast<int>(discrete_eigenvalues(DeltaProfile::lattice(L, sh, 1.0)).eigenvalues.size());
      csv << L << ',' << num(sh) << ',' << formula << ',' << scan << ','
          << (on_threshold ? 1 : 0) << ',' << (formula == scan ? 1 : 0) << '\n';
      if (on_threshold) {
        ++on;
      } else {
        ++off;
        if (formula == scan) ++off_agree;
      }
    }
  }
  write_text(out / "phase_diagram.csv", csv.str());
  json report = header(config, "phase-diagram");
  report["off_threshold_points"] = off;
  report["off_threshold_agreement"] = off_agree;
  report["on_threshold_points"] = on;
  report["thresholds"] = thresholds;
  write_json(out / "phase_diagram.json", report);
  return report;
}

json cmd_scatter(const RunConfig& config, const fs::path& out) {
  fs::create_directories(out);
  const DeltaProfile& p = config.profile;
  const ScatterKnobs& sk = config.scatter;
  std::ostringstream csv;
  csv << "k,r_re,r_im,r_abs2,s11_abs\n";
  double det_dev = 0.0, recursion = 0.0, unitarity = 0.0;
  for (std::size_t i = 0; i < sk.k_count; ++i) {
    const double k = sk.k_count == 1 ? sk.k_min
                                     : sk.k_min + (sk.k_max - sk.k_min) * static_cast<double>(i) /
                                                      static_cast<double>(sk.k_count - 1);
    const Matrix2c s = transfer_scattering(p, cplx(k, 0.0));
    const double scale = std::abs(s(0, 0) * s(1, 1)) + std::abs(s(0, 1) * s(1, 0));
    det_dev = std::max(det_dev, std::abs(s.det() - 1.0) / scale);
    const cplx r = reflection(p, cplx(k, 0.0));
    recursion = std::max(recursion, std::abs(reflection_recursive(p, cplx(k, 0.0)) - r));
    const double r2 = std::norm(r);
    unitarity = std::max(unitarity, std::fabs(1.0 / std::norm(s(0, 0)) - (1.0 - r2)));
    csv << num(k) << ',' << num(r.real()) << ',' << num(r.imag()) << ',' << num(r2) << ','
        << num(std::abs(s(0, 0))) << '\n';
  }
  write_text(out / "reflection.csv", csv.str());
  const DiscreteSpectrum spec = discrete_eigenvalues(p);
  json report = header(config, "scatter");
  report["spectrum"] = spectrum_json(spec);
  json count = {{"scan", spec.eigenvalues.size()}};
  if (auto lat = lattice_sigma_h(p)) {
    count["formula"] = soliton_count_formula(lat->first, lat->second);
    count["sigma_h"] = lat->second;
  } else if (p.positive_amplitude() == 0.0) {
    count["formula"] = 0;
  } else {
    count["formula"] = nullptr;
  }
  report["soliton_count"] = count;
  report["identities"] = {{"det_relative_deviation", det_dev},
                          {"recursion_max_difference", recursion},
                          {"transmission_consistency", unitarity}};
  report["phase_diagram"] = cmd_phase_diagram(config, out);
  report["phase_diagram"].erase("config");
  write_json(out / "scatter.json", report);
  return report;
}

json cmd_asymptotics(const RunConfig& config, const fs::path& out) {
  fs::create_directories(out);
  const AsymptoticEvaluator ev(config.profile, config.asym);
  json report = header(config, "asym");
  report["spectrum"] = spectrum_json(ev.spectrum());
  report["painleve"] = pii_suite(ev, config);
  const std::vector<double> xs = sweep(config.x_window.first, config.x_window.second, config.x_step);
  const std::vector<std::string> cols{"k0", "nu", "amplitude", "phase", "s", "a", "alpha"};
  json per_t = json::array();
  for (double t : config.t_values) {
    std::ostringstream csv;
    csv << "x,region,u_asym";
    for (const auto& c : cols) csv << ',' << c;
    csv << ",error\n";
    std::map<std::string, std::size_t> counts;
    std::size_t errors = 0;
    json seams = json::array();
    std::optional<Region> prev;
    for (double x : xs) {
      const Sample s = sample_asymptotics(ev, x, t);
      counts[to_string(s.label)]++;
      if (!s.error.empty()) ++errors;
      csv << num(x) << ',' << to_string(s.label) << ',' << opt_num(s.u);
      for (const auto& c : cols) {
        bool present = false;
        const double v = diag(s, c, present);
        csv << ',' << (present ? num(v) : std::string());
      }
      csv << ',' << s.error << '\n';
      if (prev && *prev != s.label) {
        json seam = {{"x", x}, {"left", to_string(*prev)}, {"right", to_string(s.label)}};
        try {
          const auto ul = ev.evaluate_as(*prev, x, t).u;
          const auto ur = ev.evaluate_as(s.label, x, t).u;
          if (ul && ur) {
            seam["u_left_formula"] = *ul;
            seam["u_right_formula"] = *ur;
            seam["jump"] = std::fabs(*ul - *ur);
          }
        } catch (const std::exception& e) {
          seam["error"] = e.what();
        }
        seams.push_back(seam);
      }
      prev = s.label;
    }
    write_text(out / ("asym_" + time_tag(t) + ".csv"), csv.str());

    // The strip formula evaluated directly, whatever the classification.
    const auto [lo, hi] = shock_strip(config.asym.thresholds, t);
    std::size_t ok = 0, failed = 0;
    double umax = 0.0;
    for (double x = lo; x <= hi; x += config.x_step) {
      try {
        const auto r = eval_collisionless(config.profile, x, t, config.asym.gamma_param, config.asym.cn);
        if (r.u && std::isfinite(*r.u)) {
          ++ok;
          umax = std::max(umax, std::fabs(*r.u));
        }
      } catch (const std::exception&) {
        ++failed;
      }
    }
    per_t.push_back({{"t", t},
                     {"region_counts", counts},
                     {"row_errors", errors},
                     {"seams", seams},
                     {"shock_strip", {{"x_lo", lo}, {"x_hi", hi}, {"evaluated", ok},
                                      {"failed", failed}, {"max_abs_u", umax}}}});
  }
  report["times"] = per_t;
  write_json(out / "asym.json", report);
  return report;
}

json cmd_pde(const RunConfig& config, const fs::path& out) {
  fs::create_directories(out);
  const FieldSnapshot u0 = initial_snapshot(config);
  const std::vector<FieldSnapshot> snaps = run_pde(config, u0);
  json series = json::array();
  const Conserved c0 = conserved(u0);
  series.push_back({{"t", 0.0}, {"mass", c0.mass}, {"l2", c0.l2}, {"absorbed_mass", 0.0}});
  for (const FieldSnapshot& s : snaps) {
    const Conserved c = conserved(s);
    series.push_back({{"t", s.t}, {"mass", c.mass}, {"l2", c.l2}, {"absorbed_mass", s.absorbed_mass}});
    std::ostringstream csv;
    csv << "x,u\n";
    for (std::size_t j = 0; j < s.u.size(); ++j) {
      const double x = s.grid.x(j);
      if (x < config.x_window.first || x > config.x_window.second) continue;
      csv << num(x) << ',' << num(s.u[j]) << '\n';
    }
    write_text(out / ("pde_" + time_tag(s.t) + ".csv"), csv.str());
  }
  json report = header(config, "pde");
  report["grid"] = {{"half_width", u0.grid.half_width},
                    {"n_points", u0.grid.n_points},
                    {"dx", u0.grid.dx()},
                    {"width", config.grid.width_cells * u0.grid.dx()},
                    {"dt", config.grid.dt}};
  report["conserved"] = series;
  write_json(out / "manifest.json", report);
  return report;
}

json cmd_compare(const RunConfig& config, const fs::path& out) {
  fs::create_directories(out);
  json report = header(config, "compare");
  const FieldSnapshot u0 = initial_snapshot(config);
  const std::vector<FieldSnapshot> snaps = run_pde(config, u0);

  if (config.gate) {
    const GateResult g = resolution_gate(config, u0, snaps.back());
    report["gate"] = {{"mass_drift", g.mass_drift},
                      {"l2_drift", config.grid.sponge ? json(nullptr) : json(g.l2_drift)},
                      {"halving_change", g.halving_change},
                      {"passed", g.passed}};
    if (!g.passed) {
      write_json(out / "report.json", report);
      throw InstabilityError("compare: resolution gate failed (see report.json)", 0);
    }
  }

  const AsymptoticEvaluator ev(config.profile, config.asym);
  report["spectrum"] = spectrum_json(ev.spectrum());
  json per_t = json::array();
  for (const FieldSnapshot& snap : snaps) {
    const double t = snap.t;
    std::vector<double> xs, up;
    std::vector<Region> labels;
    std::vector<std::optional<double>> ua;
    std::ostringstream csv;
    csv << "x,region,u_pde,u_asym\n";
    for (std::size_t j = 0; j < snap.u.size(); ++j) {
      const double x = snap.grid.x(j);
      if (x < config.x_window.first || x > config.x_window.second) continue;
      const Sample s = sample_asymptotics(ev, x, t);
      xs.push_back(x);
      up.push_back(snap.u[j]);
      labels.push_back(s.label);
      ua.push_back(s.u);
      csv << num(x) << ',' << to_string(s.label) << ',' << num(snap.u[j]) << ',' << opt_num(s.u) << '\n';
    }
    write_text(out / ("compare_" + time_tag(t) + ".csv"), csv.str());

    json metrics = json::array();
    for (const RegionMetric& m : region_metrics(xs, labels, up, ua)) {
      metrics.push_back({{"region", to_string(m.region)}, {"x_lo", m.x_lo}, {"x_hi", m.x_hi},
                         {"samples", m.samples}, {"linf", m.linf}, {"l2", m.l2}});
    }
    json entry = {{"t", t}, {"regions", metrics}};

    // Solitons: wells right of the origin deeper than a fifth of the deepest.
    std::vector<Peak> wells = find_wells(snap, 0.0, config.x_window.second, 0.0);
    double deepest = 0.0;
    for (const Peak& w : wells) deepest = std::min(deepest, w.value);
    json sol = json::array();
    for (const Peak& w : wells) {
      if (w.value < 0.2 * deepest) sol.push_back({{"x", w.x}, {"amplitude", -w.value}});
    }
    json predicted = json::array();
    for (double z : ev.spectrum().eigenvalues) {
      predicted.push_back({{"amplitude", 2.0 * z * z}});
    }
    entry["solitons"] = {{"pde", sol}, {"predicted", predicted}};

    // Local waves in the dispersive part of the window.
    const double x_disp = std::min(config.x_window.second, -config.asym.thresholds.C_neg * t);
    if (config.x_window.first < x_disp) {
      std::ostringstream wcsv;
      wcsv << "x,k_pde,k_asym,envelope_pde,envelope_asym\n";
      double kerr = 0.0, eerr = 0.0;
      for (const LocalWave& w : local_waves(snap, config.x_window.first, x_disp)) {
        const RegionEvaluation d = eval_dispersive(config.profile, ev.spectrum(), w.x, t, config.asym.nu);
        const double k_asym = 2.0 * d.diagnostics.at("k0");
        const double env = d.diagnostics.at("amplitude");
        kerr = std::max(kerr, std::fabs(w.wavenumber / k_asym - 1.0));
        eerr = std::max(eerr, std::fabs(w.envelope / env - 1.0));
        wcsv << num(w.x) << ',' << num(w.wavenumber) << ',' << num(k_asym) << ','
             << num(w.envelope) << ',' << num(env) << '\n';
      }
      write_text(out / ("waves_" + time_tag(t) + ".csv"), wcsv.str());
      entry["dispersive"] = {{"max_wavenumber_rel_error", kerr}, {"max_envelope_rel_error", eerr}};
    }

    // Self-similar calibration over s in [-1.5, 2] if it lies in the window.
    const double scale = std::cbrt(3.0 * t);
    if (config.x_window.first <= -1.5 * scale && config.x_window.second >= 2.0 * scale) {
      json trials = json::array();
      for (const RhoTrial& r : calibrate_rho(config, snap)) {
        trials.push_back({{"rho", r.rho}, {"linf", r.linf}});
      }
      entry["rho_calibration"] = trials;
    }

    // Strip formula against the PDE, reported only.
    const auto [lo, hi] = shock_strip(config.asym.thresholds, t);
    double shock_err = 0.0;
    std::size_t shock_n = 0;
    for (std::size_t j = 0; j < snap.u.size(); ++j) {
      const double x = snap.grid.x(j);
      if (x < lo || x > hi) continue;
      try {
        const auto r = eval_collisionless(config.profile, x, t, config.asym.gamma_param, config.asym.cn);
        shock_err = std::max(shock_err, std::fabs(*r.u - snap.u[j]));
        ++shock_n;
      } catch (const std::exception&) {
      }
    }
    entry["shock_strip"] = {{"x_lo", lo}, {"x_hi", hi}, {"evaluated", shock_n}, {"linf", shock_err}};
    per_t.push_back(entry);
  }
  report["times"] = per_t;

  if (config.mirror && config.profile.size() == 1) {
    RunConfig partner = config;
    partner.profile = DeltaProfile::single(-config.profile[0].amplitude, config.profile[0].position);
    const FieldSnapshot minus = run_pde(partner, initial_snapshot(partner)).back();
    const PhaseShift ps = measure_phase_shift(config, snaps.back(), minus);
    report["phase_shift"] = {{"k0", ps.k0},
                             {"lag", ps.lag},
                             {"measured", ps.measured},
                             {"asymptotic", ps.asymptotic},
                             {"arctan_rule", ps.arctan_rule}};
  }

  if (!config.soliton_refinement.empty()) {
    json levels = json::array();
    std::vector<double> xs, amps;
    for (std::size_t n : config.soliton_refinement) {
      RunConfig level = config;
      level.grid.half_width = config.refinement_half_width;
      level.grid.n_points = n;
      const Grid g = Grid::make(level.grid.half_width, n);
      const Grid base = Grid::make(config.grid.half_width, config.grid.n_points);
      level.grid.dt = config.grid.dt * g.dx() / base.dx();
      level.t_values = {config.t_values.back()};
      const bool same = g.half_width == base.half_width && n == base.n_points;
      const FieldSnapshot s = same ? snaps.back() : run_pde(level, initial_snapshot(level)).back();
      Peak best{0.0, 0.0};
      for (const Peak& w : find_wells(s, 0.0, level.grid.half_width * 0.8, 0.0)) {
        if (w.value < best.value) best = w;
      }
      xs.push_back(best.x);
      amps.push_back(-best.value);
      levels.push_back({{"n_points", n}, {"width", level.grid.width_cells * g.dx()},
                        {"peak_x", best.x}, {"amplitude", -best.value}});
    }
    json refinement = {{"levels", levels}};
    if (xs.size() >= 3) {
      const std::size_t q = xs.size() - 1;
      refinement["extrapolated_peak_x"] = (8.0 * xs[q] - 6.0 * xs[q - 1] + xs[q - 2]) / 3.0;
      refinement["extrapolated_amplitude"] = (8.0 * amps[q] - 6.0 * amps[q - 1] + amps[q - 2]) / 3.0;
    }
    report["soliton_refinement"] = refinement;
  }

  write_json(out / "report.json", report);
  return report;
}

// ---------------------------------------------------------------- entry point

int run(int argc, char** argv) {
  CLI::App app{"Delta-profile KdV: scattering, asymptotics and a spectral PDE oracle"};
  app.require_subcommand(1);
  std::string config_path, preset_name, out_dir = "out", nu_name;
  std::optional<double> pii_rho, gamma_param;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--preset", preset_name, "Named preset; --config overrides its fields");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--nu-convention", nu_name,
                 "neg_half_over_pi, theorem_over_pi or appendix_half_over_pi");
  app.add_option("--pii-rho", pii_rho, "Painleve II boundary multiplier");
  app.add_option("--gamma-param", gamma_param, "Constant inside the shock phase");
  const std::vector<std::string> verbs{"scatter", "asym", "pde", "compare", "phase-diagram"};
  for (const auto& v : verbs) app.add_subcommand(v)->fallthrough();
  app.fallthrough();
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  RunConfig config;
  try {
    json doc = json::object();
    if (!preset_name.empty()) doc = preset(preset_name);
    if (!config_path.empty()) {
      std::ifstream f(config_path, std::ios::binary);
      if (!f) throw ConfigError("cannot read config file '" + config_path + "'");
      std::stringstream ss;
      ss << f.rdbuf();
      const std::string text = ss.str();
      try {
        doc.merge_patch(json::parse(text));
      } catch (const json::parse_error& e) {
        throw ConfigError(config_path + ": syntax error at " +
                          locate(text, e.byte == 0 ? 0 : e.byte - 1));
      }
    }
    if (!nu_name.empty()) doc["nu_convention"] = nu_name;
    if (gamma_param) doc["gamma_param"] = *gamma_param;
    if (pii_rho) doc["pii"]["rho"] = *pii_rho;
    config = parse_config(doc);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  try {
    const fs::path out(out_dir);
    const std::string verb = app.get_subcommands().front()->get_name();
    if (verb == "scatter") cmd_scatter(config, out);
    if (verb == "asym") cmd_asymptotics(config, out);
    if (verb == "pde") cmd_pde(config, out);
    if (verb == "compare") cmd_compare(config, out);
    if (verb == "phase-diagram") cmd_phase_diagram(config, out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace kdvdelta::cli
