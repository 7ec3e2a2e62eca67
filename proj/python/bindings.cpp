#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "kdvdelta/analysis.hpp"
#include "kdvdelta/asymptotics.hpp"
#include "kdvdelta/cli.hpp"
#include "kdvdelta/painleve.hpp"
#include "kdvdelta/pde.hpp"
#include "kdvdelta/scattering.hpp"
#include "kdvdelta/specfun.hpp"

namespace py = pybind11;
using namespace kdvdelta;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
  py::array_t<double> a(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

py::dict evaluation_dict(const RegionEvaluation& e) {
  py::dict d;
  d["label"] = to_string(e.label);
  d["u"] = e.u ? py::cast(*e.u) : py::none();
  d["diagnostics"] = e.diagnostics;
  d["warnings"] = e.warnings;
  return d;
}

Region parse_region(const std::string& name) {
  for (Region r : {Region::Soliton, Region::Decay, Region::SelfSimilar, Region::CollisionlessShock,
                   Region::DispersiveWave, Region::TransitionT}) {
    if (to_string(r) == name) return r;
  }
  throw DomainError("unknown region '" + name + "'");
}

// Runs a CLI verb on a JSON config string and returns the report as a string.
std::string run_verb(const std::string& verb, const std::string& config_json,
                     const std::filesystem::path& out) {
  const cli::RunConfig c = cli::parse_config(config_json);
  cli::json report;
  if (verb == "scatter") {
    report = cli::cmd_scatter(c, out);
  } else if (verb == "asym") {
    report = cli::cmd_asymptotics(c, out);
  } else if (verb == "pde") {
    report = cli::cmd_pde(c, out);
  } else if (verb == "compare") {
    report = cli::cmd_compare(c, out);
  } else if (verb == "phase-diagram") {
    report = cli::cmd_phase_diagram(c, out);
  } else {
    throw ConfigError("unknown verb '" + verb + "'");
  }
  return report.dump();
}

}  // namespace

PYBIND11_MODULE(kdvdelta, m) {
  m.doc() = "KdV with delta-function initial data: scattering, asymptotics and a PDE oracle";

  auto base = py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<PoleError>(m, "PoleError", PyExc_ArithmeticError);
  py::register_exception<RangeError>(m, "RangeError", PyExc_IndexError);
  py::register_exception<SpectralError>(m, "SpectralError", PyExc_RuntimeError);
  py::register_exception<BlowUpError>(m, "BlowUpError", PyExc_OverflowError);
  py::register_exception<ModulationError>(m, "ModulationError", PyExc_ValueError);
  py::register_exception<InstabilityError>(m, "InstabilityError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  (void)base;

  py::class_<DeltaProfile>(m, "DeltaProfile")
      .def(py::init([](const std::vector<std::pair<double, double>>& spikes) {
             std::vector<Spike> v;
             for (const auto& [u, x] : spikes) v.push_back({u, x});
             return DeltaProfile(v);
           }),
           py::arg("spikes"), "List of (amplitude U_n, position x_n) pairs.")
      .def_static("single", &DeltaProfile::single, py::arg("amplitude"), py::arg("position") = 0.0)
      .def_static("lattice", &DeltaProfile::lattice, py::arg("count"), py::arg("h"), py::arg("sigma"))
      .def_property_readonly("spikes",
                             [](const DeltaProfile& p) {
                               std::vector<std::pair<double, double>> v;
                               for (const Spike& s : p.spikes()) v.emplace_back(s.amplitude, s.position);
                               return v;
                             })
      .def("__len__", &DeltaProfile::size)
      .def("total_amplitude", &DeltaProfile::total_amplitude)
      .def("__repr__", [](const DeltaProfile& p) {
        return "DeltaProfile(" + std::to_string(p.size()) + " spikes)";
      });

  // scattering
  m.def(
      "transfer_scattering",
      [](const DeltaProfile& p, cplx k) {
        const Matrix2c s = transfer_scattering(p, k);
        py::array_t<cplx> a({2, 2});
        auto r = a.mutable_unchecked<2>();
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) r(i, j) = s(i, j);
        return a;
      },
      py::arg("profile"), py::arg("k"));
  m.def("reflection", &reflection, py::arg("profile"), py::arg("k"));
  m.def("reflection_recursive", &reflection_recursive, py::arg("profile"), py::arg("k"));
  m.def("s11_imag_axis", &s11_imag_axis, py::arg("profile"), py::arg("z"));
  m.def(
      "discrete_eigenvalues",
      [](const DeltaProfile& p) {
        const DiscreteSpectrum s = discrete_eigenvalues(p);
        py::dict d;
        d["eigenvalues"] = s.eigenvalues;
        d["norming_constants"] = s.norming_constants;
        d["warnings"] = s.warnings;
        return d;
      },
      py::arg("profile"));
  m.def("soliton_threshold", &soliton_threshold, py::arg("count"), py::arg("l"));
  m.def("soliton_count_formula", &soliton_count_formula, py::arg("count"), py::arg("sigma_h"));
  m.def("chebyshev_A", &chebyshev_A, py::arg("count"), py::arg("sigma_h"));

  // special functions
  m.def("airy_ai", &specfun::airy_ai, py::arg("s"));
  m.def("airy_ai_prime", &specfun::airy_ai_prime, py::arg("s"));
  m.def("elliptic_K", &specfun::elliptic_K, py::arg("m"));
  m.def("jacobi_cn", &specfun::jacobi_cn, py::arg("u"), py::arg("m"));
  m.def("log_gamma", &specfun::log_gamma, py::arg("z"));
  m.def(
      "gamma_arg_imag",
      [](double nu) {
        const specfun::GammaArg g = specfun::gamma_arg_imag(nu);
        return py::make_tuple(g.arg, g.log_abs);
      },
      py::arg("nu"), "(arg, log|.|) of Gamma(i nu).");

  // Painleve II
  py::class_<PIISolution>(m, "PIISolution")
      .def_property_readonly("s", [](const PIISolution& s) { return to_array(s.s); })
      .def_property_readonly("y", [](const PIISolution& s) { return to_array(s.y); })
      .def_property_readonly("y_prime", [](const PIISolution& s) { return to_array(s.y_prime); })
      .def_readonly("rho", &PIISolution::rho)
      .def("eval", [](const PIISolution& s, double x) {
        const PIIPoint p = pii_eval(s, x);
        return py::make_tuple(p.y, p.y_prime);
      })
      .def("combination", [](const PIISolution& s, double x) { return pii_combination(s, x); })
      .def("residual", [](const PIISolution& s) { return pii_residual(s); });
  m.def(
      "solve_pii",
      [](double rho, double s_max, double s_min, double step) {
        return solve_pii(rho, s_max, s_min, step);
      },
      py::arg("rho"), py::arg("s_max"), py::arg("s_min"), py::arg("step"));

  // asymptotics
  py::class_<AsymptoticEvaluator>(m, "AsymptoticEvaluator")
      .def(py::init([](const DeltaProfile& p, double pii_rho, const std::string& nu,
                       const std::string& cn, double gamma_param) {
             AsymptoticOptions o;
             o.pii_rho = pii_rho;
             o.nu = parse_nu_convention(nu);
             o.cn = parse_cn_convention(cn);
             o.gamma_param = gamma_param;
             return AsymptoticEvaluator(p, o);
           }),
           py::arg("profile"), py::arg("pii_rho") = AsymptoticOptions{}.pii_rho,
           py::arg("nu_convention") = "neg_half_over_pi", py::arg("cn_convention") = "parameter",
           py::arg("gamma_param") = 1.0)
      .def("classify", [](const AsymptoticEvaluator& e, double x, double t) { return to_string(e.classify(x, t)); })
      .def("evaluate", [](const AsymptoticEvaluator& e, double x, double t) { return evaluation_dict(e.evaluate(x, t)); })
      .def("evaluate_as",
           [](const AsymptoticEvaluator& e, const std::string& region, double x, double t) {
             return evaluation_dict(e.evaluate_as(parse_region(region), x, t));
           })
      .def_property_readonly("eigenvalues", [](const AsymptoticEvaluator& e) { return e.spectrum().eigenvalues; });
  m.def(
      "solve_modulation",
      [](double k0, double tau) {
        const Modulation md = solve_modulation(k0, tau);
        return py::make_tuple(md.a, md.b, md.alpha);
      },
      py::arg("k0"), py::arg("tau"));
  m.def("modulation_integral", &modulation_integral, py::arg("a"));
  m.def(
      "chi_integral", [](const DeltaProfile& p, double k0) { return chi_integral(p, k0); },
      py::arg("profile"), py::arg("k0"));

  // PDE oracle
  m.def(
      "evolve_profile",
      [](const DeltaProfile& p, double half_width, std::size_t n_points, double width_cells,
         double dt, std::vector<double> t_values, bool sponge) {
        if (t_values.empty()) throw DomainError("evolve_profile: t_values is empty");
        const Grid g = Grid::make(half_width, n_points);
        const FieldSnapshot u0 = discretize_profile(p, g, width_cells * g.dx());
        EvolveOptions o;
        o.output_times = t_values;
        o.sponge = sponge;
        std::vector<double> x(n_points);
        for (std::size_t j = 0; j < n_points; ++j) x[j] = g.x(j);
        py::list snaps;
        {
          py::gil_scoped_release release;
          const auto out = evolve(u0, t_values.back(), dt, o);
          py::gil_scoped_acquire acquire;
          for (const FieldSnapshot& s : out) snaps.append(py::make_tuple(s.t, to_array(s.u)));
        }
        return py::make_tuple(to_array(x), snaps);
      },
      py::arg("profile"), py::arg("half_width"), py::arg("n_points"), py::arg("width_cells") = 4.0,
      py::arg("dt") = 1e-3, py::arg("t_values") = std::vector<double>{50.0}, py::arg("sponge") = true,
      "Returns (x, [(t, u), ...]).");

  // configuration and verbs
  m.def("preset_names", &cli::preset_names);
  m.def("preset", [](const std::string& name) { return cli::preset(name).dump(); }, py::arg("name"));
  m.def(
      "config_hash", [](const std::string& text) { return cli::config_hash(cli::parse_config(text)); },
      py::arg("config_json"));
  m.def(
      "canonical_config",
      [](const std::string& text) { return cli::config_to_json(cli::parse_config(text)).dump(); },
      py::arg("config_json"));
  m.def("run_verb", &run_verb, py::arg("verb"), py::arg("config_json"), py::arg("out"),
        "Runs scatter, asym, pde, compare or phase-diagram; returns the JSON report.");
}
