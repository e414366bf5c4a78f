#pragma once

// Run configuration, figure presets and grid sweeps behind the command line tool.

#include "qruler/dynamics.hpp"
#include "qruler/ion.hpp"
#include "qruler/lattice.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace qruler {

enum class Scenario { modes, coherence_sweep, response, cstar_sweep, validate };

Scenario parse_scenario(const std::string& name);
const char* to_string(Scenario s);

enum class IonKind { dimensionless, physical };

struct RunConfig {
  Scenario scenario = Scenario::modes;
  RulerConfig ruler;               ///< n_dipoles is overridden by each entry of n_values
  std::vector<int> n_values{41};
  IonKind ion_kind = IonKind::dimensionless;
  std::vector<double> lambdas{2.0};
  IonPhysical physical;
  std::vector<int> separations;
  std::vector<double> cs{0.1};
  int site = 0;
  std::optional<int> site2;        ///< set for a two-site superposition response
  FMethod coherence_method = FMethod::long_time;
  double switch_factor = 50.0;     ///< Omega_1 delta_t
  double time_factor = 10.0;       ///< t / delta_t
  int threads = 1;

  /// Throws ConfigError naming the first offending entry.
  void validate() const;
};

/// Preset names accepted by make_preset.
std::vector<std::string> preset_names();
/// Throws ConfigError for an unknown name or a preset that does not belong to `scenario`.
RunConfig make_preset(const std::string& name, Scenario scenario);

/// Flat `key = value` document; `#` starts a comment. Lists are comma separated and integer
/// lists also accept `first:last[:step]` ranges. Unknown keys are errors.
void apply_config_text(RunConfig& cfg, const std::string& text);
void apply_config_file(RunConfig& cfg, const std::string& path);
/// Documented schema, one line per key.
std::string config_schema();

using Cell = std::variant<std::int64_t, double>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  /// Extra JSON emitted alongside the rows in JSON output (per-row audit records).
  std::vector<std::string> audit;
  std::vector<std::string> warnings;

  void write_csv(std::ostream& os) const;
  void write_json(std::ostream& os) const;
};

/// Columns alpha,n,u,omega for the first entry of n_values.
Table run_modes(const RunConfig& cfg);
/// Columns N,lambda,i1,i2,s,C_I; sites are placed at i1 = -floor(sep/2), i2 = i1 + sep.
Table run_coherence_sweep(const RunConfig& cfg);
/// Columns n,mean,sigma.
Table run_response(const RunConfig& cfg);
/// Columns N,lambda,c,separation,cstar with the same site placement; one audit record per row.
Table run_cstar_sweep(const RunConfig& cfg);
/// Regime report for the first N and lambda. Throws ConfigError for invalid physical parameters.
RegimeReport run_validate(const RunConfig& cfg);

/// i1 for a separation under the symmetric placement rule.
int placement_i1(int separation);

}  // namespace qruler
