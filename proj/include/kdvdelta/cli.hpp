#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "kdvdelta/analysis.hpp"
#include "kdvdelta/asymptotics.hpp"
#include "kdvdelta/pde.hpp"
#include "kdvdelta/profile.hpp"

namespace kdvdelta::cli {

using json = nlohmann::json;

struct GridKnobs {
  double half_width = 1024.0;
  std::size_t n_points = 32768;
  double width_cells = 4.0;  // rectangle width in units of dx
  double dt = 1e-3;
  bool sponge = true;
};

struct ScatterKnobs {
  double k_min = 0.05;
  double k_max = 5.0;
  std::size_t k_count = 100;
};

struct PhaseDiagramKnobs {
  std::vector<int> counts{1, 2, 3, 4, 5, 6};
  double sigma_h_min = 0.1;
  double sigma_h_max = 6.0;
  std::size_t sigma_h_count = 60;
};

struct RunConfig {
  DeltaProfile profile = DeltaProfile::single(2.0);
  std::vector<double> t_values{50.0};
  std::pair<double, double> x_window{-700.0, 250.0};
  double x_step = 0.25;  // asymptotic sweep spacing
  GridKnobs grid;
  AsymptoticOptions asym;
  ScatterKnobs scatter;
  PhaseDiagramKnobs phase_diagram;
  bool gate = true;          // resolution-halving check before comparing
  bool mirror = false;       // also run -U and measure the phase shift
  std::vector<std::size_t> soliton_refinement;  // n_points for a width study
  double refinement_half_width = 512.0;
};

/// Parses a JSON config; unknown or malformed fields throw ConfigError naming
/// the field. Syntax errors report line and column.
RunConfig parse_config(const std::string& text);
RunConfig parse_config(const json& doc);
inline RunConfig parse_config(const char* text) { return parse_config(std::string(text)); }
json config_to_json(const RunConfig& config);

/// 64-bit FNV-1a of the canonical config JSON, as 16 hex digits.
std::string config_hash(const RunConfig& config);

std::vector<std::string> preset_names();
/// Config document of a named preset; throws ConfigError for unknown names.
json preset(const std::string& name);

// Building blocks shared by the CLI verbs and the acceptance suite.

FieldSnapshot initial_snapshot(const RunConfig& config);

/// Evolves the initial data to every t in config.t_values.
std::vector<FieldSnapshot> run_pde(const RunConfig& config, const FieldSnapshot& u0);

struct GateResult {
  double mass_drift;      // |mass + absorbed - mass0| / |mass0| of the coarse run
  double l2_drift;        // relative change of the L2 integral; meaningful with the sponge off
  double halving_change;  // L-infinity change at the last time inside the window
  bool passed;
};

/// Re-runs the dealiased initial data with dx and dt halved and compares.
GateResult resolution_gate(const RunConfig& config, const FieldSnapshot& u0,
                           const FieldSnapshot& coarse_final);

struct RhoTrial {
  double rho;
  double linf;
};

/// L-infinity error of the self-similar formula against `pde` over
/// s in [s_lo, s_hi] for each trial rho.
std::vector<RhoTrial> calibrate_rho(const RunConfig& config, const FieldSnapshot& pde,
                                    double s_lo = -1.5, double s_hi = 2.0);

struct PhaseShift {
  double k0;
  double lag;            // correlation lag of the -U run against the +U run
  double measured;       // phase difference implied by the lag, in [0, 2 pi)
  double asymptotic;     // phi(+U) - phi(-U) from the evaluator, in [0, 2 pi)
  double arctan_rule;    // 4 arctan(|U| / (2 k0))
};

PhaseShift measure_phase_shift(const RunConfig& config, const FieldSnapshot& plus,
                               const FieldSnapshot& minus, double k0 = 1.0);

struct RegionMetric {
  Region region;
  double x_lo, x_hi;  // segment bounds before the 5% buffer
  std::size_t samples;
  double linf;
  double l2;
};

/// Per-segment errors between u_pde and u_asym along x (ascending), with the
/// region label of each sample; 5% of each segment is dropped at both ends.
std::vector<RegionMetric> region_metrics(const std::vector<double>& x,
                                         const std::vector<Region>& labels,
                                         const std::vector<double>& u_pde,
                                         const std::vector<std::optional<double>>& u_asym);

/// Bounds [lo, hi] of the shock strip at time t.
std::pair<double, double> shock_strip(const RegionThresholds& th, double t);

/// Residual and step-halving drift on [-2, 8] plus Airy agreement for s >= 6.
json pii_suite(const AsymptoticEvaluator& ev, const RunConfig& config);

// Verbs. Each writes into `out` and returns the report document.
json cmd_scatter(const RunConfig& config, const std::filesystem::path& out);
json cmd_asymptotics(const RunConfig& config, const std::filesystem::path& out);
json cmd_pde(const RunConfig& config, const std::filesystem::path& out);
json cmd_compare(const RunConfig& config, const std::filesystem::path& out);
json cmd_phase_diagram(const RunConfig& config, const std::filesystem::path& out);

/// Entry point: 0 success, 2 configuration error, 3 numerical failure.
int run(int argc, char** argv);

}  // namespace kdvdelta::cli
