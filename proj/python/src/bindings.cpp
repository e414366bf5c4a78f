#include "qruler/dynamics.hpp"
#include "qruler/error.hpp"
#include "qruler/experiments.hpp"
#include "qruler/measurement.hpp"
#include "qruler/response.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace qruler;

namespace {

std::string render(const Table& t, const std::string& format) {
  std::ostringstream os;
  if (format == "json") t.write_json(os);
  else if (format == "csv") t.write_csv(os);
  else throw ConfigError("format must be csv or json, got '" + format + "'");
  return os.str();
}

std::string run(const std::string& scenario, const std::string& preset, const std::string& config,
                const std::string& format, int threads) {
  const Scenario s = parse_scenario(scenario);
  RunConfig cfg = preset.empty() ? RunConfig{} : make_preset(preset, s);
  cfg.scenario = s;
  if (!config.empty()) apply_config_text(cfg, config);
  if (threads > 0) cfg.threads = threads;
  switch (s) {
    case Scenario::modes: return render(run_modes(cfg), format);
    case Scenario::coherence_sweep: return render(run_coherence_sweep(cfg), format);
    case Scenario::response: return render(run_response(cfg), format);
    case Scenario::cstar_sweep: return render(run_cstar_sweep(cfg), format);
    case Scenario::validate: {
      const RegimeReport r = run_validate(cfg);
      return format == "json" ? r.to_json() : r.to_text();
    }
  }
  return {};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Relational quantum ruler: normal modes, ion coherence, ruler response and joint measurement coherence.";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<RegimeError>(m, "RegimeError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<RulerConfig>(m, "RulerConfig")
      .def(py::init<>())
      .def(py::init([](int n, double s, double mass0, double stiffness0) {
             RulerConfig c;
             c.n_dipoles = n;
             c.scaling_exponent = s;
             c.mass0 = mass0;
             c.stiffness0 = stiffness0;
             return c;
           }),
           py::arg("n_dipoles"), py::arg("scaling_exponent") = 0.0, py::arg("mass0") = 1.0,
           py::arg("stiffness0") = 1.0)
      .def_readwrite("n_dipoles", &RulerConfig::n_dipoles)
      .def_readwrite("mass0", &RulerConfig::mass0)
      .def_readwrite("stiffness0", &RulerConfig::stiffness0)
      .def_readwrite("spacing", &RulerConfig::spacing)
      .def_readwrite("scaling_exponent", &RulerConfig::scaling_exponent)
      .def_readwrite("hbar", &RulerConfig::hbar)
      .def_property_readonly("mass", &RulerConfig::mass)
      .def_property_readonly("stiffness", &RulerConfig::stiffness);

  py::class_<ModeBasis>(m, "ModeBasis")
      .def_property_readonly("size", &ModeBasis::size)
      .def_property_readonly("mode_count", &ModeBasis::mode_count)
      .def_property_readonly("half", &ModeBasis::half)
      .def_property_readonly("omega_r", &ModeBasis::omega_r)
      .def_property_readonly("omegas", &ModeBasis::Omegas)
      .def_property_readonly("x0s", &ModeBasis::x0s)
      .def_property_readonly("u_matrix", &ModeBasis::u_matrix)
      .def("u", &ModeBasis::u, py::arg("alpha"), py::arg("n"))
      .def("zero_point_sigma", &ModeBasis::zero_point_sigma, py::arg("n"));
  m.def("build_mode_basis", &build_mode_basis, py::arg("config"));

  py::class_<IonPhysical>(m, "IonPhysical")
      .def(py::init<>())
      .def_readwrite("ion_mass", &IonPhysical::ion_mass)
      .def_readwrite("ion_charge", &IonPhysical::ion_charge)
      .def_readwrite("dipole_charge", &IonPhysical::dipole_charge)
      .def_readwrite("dipole_separation", &IonPhysical::dipole_separation)
      .def_readwrite("distance", &IonPhysical::distance)
      .def_readwrite("eps0", &IonPhysical::eps0);

  py::class_<IonModel>(m, "IonModel")
      .def_property_readonly("lambda_", &IonModel::lambda)
      .def_property_readonly("couplings", &IonModel::couplings)
      .def("coupling", &IonModel::coupling, py::arg("alpha"), py::arg("n"));
  m.def("build_dimensionless_model", &build_dimensionless_model, py::arg("basis"), py::arg("lam"));
  m.def("build_ion_model", &build_ion_model, py::arg("physical"), py::arg("basis"));

  py::enum_<FMethod>(m, "FMethod")
      .value("long_time", FMethod::long_time)
      .value("asymptotic", FMethod::asymptotic)
      .value("quadrature", FMethod::quadrature);

  py::class_<SwitchingProfile>(m, "SwitchingProfile")
      .def_static("slow", &SwitchingProfile::slow, py::arg("basis"), py::arg("factor") = 50.0)
      .def_static("exponential", &SwitchingProfile::exponential, py::arg("delta_t"))
      .def_readonly("delta_t", &SwitchingProfile::delta_t);

  m.def("coherence_longtime", &coherence_longtime, py::arg("i1"), py::arg("i2"), py::arg("model"), py::arg("basis"));
  m.def("coherence_t", &coherence_t, py::arg("i1"), py::arg("i2"), py::arg("t"), py::arg("switching"),
        py::arg("model"), py::arg("basis"), py::arg("method") = FMethod::quadrature);

  py::class_<ResponseProfile>(m, "ResponseProfile")
      .def_readonly("i1", &ResponseProfile::i1)
      .def_readonly("i2", &ResponseProfile::i2)
      .def_readonly("mean", &ResponseProfile::mean)
      .def_readonly("sigma", &ResponseProfile::sigma);
  m.def("response_single", &response_single, py::arg("i"), py::arg("model"), py::arg("basis"),
        py::arg("edge_margin") = 2);
  m.def("response_superposition", &response_superposition, py::arg("i1"), py::arg("i2"), py::arg("model"),
        py::arg("basis"), py::arg("edge_margin") = 2);

  py::class_<CStarResult>(m, "CStarResult")
      .def_readonly("i1", &CStarResult::i1)
      .def_readonly("i2", &CStarResult::i2)
      .def_readonly("c", &CStarResult::c)
      .def_readonly("cstar", &CStarResult::cstar)
      .def_readonly("log_cstar", &CStarResult::log_cstar)
      .def_readonly("ratio", &CStarResult::ratio)
      .def_readonly("underflow", &CStarResult::underflow)
      .def("to_json", &CStarResult::to_json);
  m.def("cstar", &cstar, py::arg("i1"), py::arg("i2"), py::arg("c"), py::arg("model"), py::arg("basis"),
        py::arg("edge_margin") = 2);

  m.def("preset_names", &preset_names);
  m.def("config_schema", &config_schema);
  m.def("run", &run, py::arg("scenario"), py::arg("preset") = "", py::arg("config") = "", py::arg("format") = "csv",
        py::arg("threads") = 0,
        "Run a scenario (modes, coherence-sweep, response, cstar-sweep, validate) and return CSV, JSON or the "
        "validation report as text.");
}
