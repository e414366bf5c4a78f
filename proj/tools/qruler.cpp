// qruler: experiment runner for the quantum ruler model.

#include "qruler/error.hpp"
#include "qruler/experiments.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <stdexcept>
#include <sstream>

namespace {

struct Options {
  std::string preset;
  std::string config;
  std::string out;
  std::string format = "csv";
  int threads = 0;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--preset", o.preset, "Named parameter block (see --list-presets)");
  sub->add_option("--config", o.config, "Flat key = value file applied after the preset");
  sub->add_option("--out", o.out, "Output path (default: standard output)");
  sub->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
}

qruler::RunConfig resolve(qruler::Scenario scenario, const Options& o) {
  qruler::RunConfig cfg = o.preset.empty() ? qruler::RunConfig{} : qruler::make_preset(o.preset, scenario);
  cfg.scenario = scenario;
  if (!o.config.empty()) qruler::apply_config_file(cfg, o.config);
  if (o.threads > 0) cfg.threads = o.threads;
  return cfg;
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw qruler::ConfigError("cannot write '" + path + "'");
  f << text;
}

int run(qruler::Scenario scenario, const Options& o) {
  const qruler::RunConfig cfg = resolve(scenario, o);
  std::ostringstream os;
  if (scenario == qruler::Scenario::validate) {
    const qruler::RegimeReport report = qruler::run_validate(cfg);
    os << (o.format == "json" ? report.to_json() + "\n" : report.to_text());
    emit(os.str(), o.out);
    return 0;
  }
  qruler::Table table;
  switch (scenario) {
    case qruler::Scenario::modes: table = qruler::run_modes(cfg); break;
    case qruler::Scenario::coherence_sweep: table = qruler::run_coherence_sweep(cfg); break;
    case qruler::Scenario::response: table = qruler::run_response(cfg); break;
    case qruler::Scenario::cstar_sweep: table = qruler::run_cstar_sweep(cfg); break;
    case qruler::Scenario::validate: break;
  }
  for (const auto& w : table.warnings) std::cerr << "warning: " << w << '\n';
  if (o.format == "json") table.write_json(os);
  else table.write_csv(os);
  emit(os.str(), o.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum ruler simulator"};
  app.require_subcommand(0, 1);
  bool list_presets = false;
  bool schema = false;
  app.add_flag("--list-presets", list_presets, "Print preset names");
  app.add_flag("--schema", schema, "Print the config file keys");

  struct Entry {
    qruler::Scenario scenario;
    const char* name;
    const char* help;
  };
  const Entry entries[] = {
      {qruler::Scenario::modes, "modes", "Normal mode table: alpha,n,u,omega"},
      {qruler::Scenario::coherence_sweep, "coherence-sweep", "Ion coherence over N and separation"},
      {qruler::Scenario::response, "response", "Mean dipole displacement and uncertainty profile"},
      {qruler::Scenario::cstar_sweep, "cstar-sweep", "Joint measurement coherence over separation"},
      {qruler::Scenario::validate, "validate", "Regime validity report"},
  };
  Options opts[5];
  CLI::App* subs[5];
  for (int k = 0; k < 5; ++k) {
    subs[k] = app.add_subcommand(entries[k].name, entries[k].help);
    add_common(subs[k], opts[k]);
  }
  CLI11_PARSE(app, argc, argv);

  if (list_presets) {
    for (const auto& p : qruler::preset_names()) std::cout << p << '\n';
    return 0;
  }
  if (schema) {
    std::cout << qruler::config_schema();
    return 0;
  }
  try {
    for (int k = 0; k < 5; ++k)
      if (subs[k]->parsed()) return run(entries[k].scenario, opts[k]);
    std::cout << app.help();
    return 1;
  } catch (const qruler::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return 3;
  } catch (const qruler::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 4;
  }
}
