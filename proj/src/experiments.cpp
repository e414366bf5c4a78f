#include "qruler/experiments.hpp"

#include "qruler/csv.hpp"
#include "qruler/error.hpp"
#include "qruler/measurement.hpp"
#include "qruler/response.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <thread>

namespace qruler {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty())
    throw ConfigError("key '" + key + "': '" + v + "' is not a number");
  return x;
}

int parse_int(const std::string& key, const std::string& v) {
  int x = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty())
    throw ConfigError("key '" + key + "': '" + v + "' is not an integer");
  return x;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  if (trim(v).empty()) return out;
  for (const std::string& item : split(v, ',')) {
    const auto parts = split(item, ':');
    if (parts.size() == 1) {
      out.push_back(parse_int(key, parts[0]));
    } else if (parts.size() == 2 || parts.size() == 3) {
      const int first = parse_int(key, parts[0]);
      const int last = parse_int(key, parts[1]);
      const int step = parts.size() == 3 ? parse_int(key, parts[2]) : 1;
      if (step <= 0) throw ConfigError("key '" + key + "': range step must be positive in '" + item + "'");
      for (int x = first; x <= last; x += step) out.push_back(x);
    } else {
      throw ConfigError("key '" + key + "': malformed range '" + item + "'");
    }
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  if (trim(v).empty()) return out;
  for (const std::string& item : split(v, ',')) out.push_back(parse_double(key, item));
  return out;
}

FMethod parse_method(const std::string& v) {
  if (v == "longtime") return FMethod::long_time;
  if (v == "asymptotic") return FMethod::asymptotic;
  if (v == "quadrature") return FMethod::quadrature;
  throw ConfigError("coherence_method must be longtime, asymptotic or quadrature, got '" + v + "'");
}

RulerConfig ruler_for(const RunConfig& cfg, int n) {
  RulerConfig r = cfg.ruler;
  r.n_dipoles = n;
  return r;
}

IonModel model_for(const RunConfig& cfg, const ModeBasis& basis, double lambda) {
  if (cfg.ion_kind == IonKind::physical) return build_ion_model(cfg.physical, basis);
  return build_dimensionless_model(basis, lambda);
}

// Lambdas iterated by a sweep; a physical model has exactly one, fixed by its parameters.
std::vector<double> sweep_lambdas(const RunConfig& cfg) {
  if (cfg.ion_kind == IonKind::physical) return {0.0};
  return cfg.lambdas;
}

// Runs fn(k) for k in [0, count) on `threads` workers; results land in index order.
template <typename T>
std::vector<T> run_grid(std::size_t count, int threads, const std::function<T(std::size_t)>& fn) {
  std::vector<T> out(count);
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(count)));
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) out[k] = fn(k);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < count; k = next++) {
        try {
          out[k] = fn(k);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

std::string cell_text(const Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  return format_number(std::get<double>(c));
}

// Number literal in JSON with the same 12 significant digits as the CSV.
nlohmann::json cell_json(const Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c)) return *i;
  const double v = std::get<double>(c);
  if (!std::isfinite(v)) return nullptr;
  return std::stod(format_number(v));
}

}  // namespace

Scenario parse_scenario(const std::string& name) {
  if (name == "modes") return Scenario::modes;
  if (name == "coherence-sweep") return Scenario::coherence_sweep;
  if (name == "response") return Scenario::response;
  if (name == "cstar-sweep") return Scenario::cstar_sweep;
  if (name == "validate") return Scenario::validate;
  throw ConfigError("unknown scenario '" + name + "'");
}

const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::modes: return "modes";
    case Scenario::coherence_sweep: return "coherence-sweep";
    case Scenario::response: return "response";
    case Scenario::cstar_sweep: return "cstar-sweep";
    case Scenario::validate: return "validate";
  }
  return "?";
}

void RunConfig::validate() const {
  if (threads < 1) throw ConfigError("threads must be at least 1, got " + std::to_string(threads));
  for (int n : n_values) ruler_for(*this, n).validate();
  if (ion_kind == IonKind::physical) {
    physical.validate();
  } else {
    for (double l : lambdas) {
      if (!(l >= 0.0) || !std::isfinite(l)) throw ConfigError("lambda must be finite and >= 0, got " + format_number(l));
    }
  }
  if (!(switch_factor > 0.0)) throw ConfigError("switch_factor must be positive");
  if (!(time_factor > 0.0)) throw ConfigError("time_factor must be positive");

  auto check_site = [&](int n, int s, const std::string& what) {
    const int half = (n - 1) / 2;
    if (std::abs(s) > half - 2)
      throw ConfigError(what + ": site " + std::to_string(s) + " is within 2 sites of the edge for N=" +
                        std::to_string(n));
  };
  switch (scenario) {
    case Scenario::coherence_sweep:
    case Scenario::cstar_sweep:
      for (int sep : separations) {
        if (sep < 1) throw ConfigError("separation must be >= 1, got " + std::to_string(sep));
        for (int n : n_values) {
          const std::string what = "separation " + std::to_string(sep);
          check_site(n, placement_i1(sep), what);
          check_site(n, placement_i1(sep) + sep, what);
        }
      }
      if (scenario == Scenario::cstar_sweep) {
        for (double c : cs) {
          if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("c must be positive, got " + format_number(c));
        }
      }
      break;
    case Scenario::response:
      if (n_values.size() != 1) throw ConfigError("response needs exactly one n_dipoles value");
      if (ion_kind == IonKind::dimensionless && lambdas.size() != 1)
        throw ConfigError("response needs exactly one lambda value");
      check_site(n_values[0], site, "site");
      if (site2) {
        check_site(n_values[0], *site2, "site2");
        if (*site2 == site) throw ConfigError("site2 must differ from site");
      }
      break;
    case Scenario::modes:
    case Scenario::validate:
      if (n_values.empty()) throw ConfigError("n_dipoles must not be empty");
      break;
  }
}

int placement_i1(int separation) { return -(separation / 2); }

std::vector<std::string> preset_names() {
  return {"fig3a", "fig3b", "fig4a", "fig4b", "fig5a", "fig5b", "fig6", "fig6-fine", "cstar-strong",
          "modes41", "dimensionless", "kappa5", "dipole-too-large"};
}

RunConfig make_preset(const std::string& name, Scenario scenario) {
  RunConfig cfg;
  cfg.scenario = scenario;
  Scenario expected = scenario;
  auto scaled41 = [&] {
    cfg.n_values = {41};
    cfg.ruler.scaling_exponent = 1.0;
  };
  if (name == "fig3a" || name == "fig3b") {
    expected = Scenario::coherence_sweep;
    cfg.n_values.clear();
    for (int n = 11; n <= 41; n += 2) cfg.n_values.push_back(n);
    cfg.separations = {1, 2, 3, 4, 5, 6};
    cfg.lambdas = {name == "fig3a" ? 0.3 : 2.0};
    cfg.ruler.scaling_exponent = name == "fig3a" ? 0.0 : 1.0;
  } else if (name == "fig4a" || name == "fig4b") {
    expected = Scenario::response;
    scaled41();
    cfg.lambdas = {name == "fig4a" ? 2.0 : 25.0};
    cfg.site = 0;
  } else if (name == "fig5a" || name == "fig5b") {
    expected = Scenario::response;
    scaled41();
    cfg.lambdas = {name == "fig5a" ? 2.0 : 25.0};
    cfg.site = -5;
    cfg.site2 = 5;
  } else if (name == "fig6" || name == "fig6-fine") {
    expected = Scenario::cstar_sweep;
    scaled41();
    cfg.lambdas = {2.0};
    cfg.cs = {name == "fig6" ? 0.1 : 0.05};
    cfg.separations = {2, 4, 6, 8, 10, 12, 14};
  } else if (name == "cstar-strong") {
    expected = Scenario::cstar_sweep;
    scaled41();
    cfg.lambdas = {25.0};
    cfg.cs = {0.1};
    cfg.separations = {2};
  } else if (name == "modes41") {
    expected = Scenario::modes;
    scaled41();
  } else if (name == "dimensionless") {
    expected = Scenario::validate;
    scaled41();
  } else if (name == "kappa5") {
    // kappa = M_I q_I p_r / (2 pi hbar^2 eps0 w) = 5 with a_r = 1.
    expected = Scenario::validate;
    cfg.n_values = {41};
    cfg.ion_kind = IonKind::physical;
    cfg.physical.ion_mass = 1000.0 * 3.14159265358979323846;
    cfg.physical.dipole_separation = 0.01;
    cfg.physical.distance = 1.0;
  } else if (name == "dipole-too-large") {
    expected = Scenario::validate;
    cfg.n_values = {41};
    cfg.ion_kind = IonKind::physical;
    cfg.physical.dipole_separation = 2.0;
    cfg.physical.distance = 1.0;
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  if (expected != scenario)
    throw ConfigError("preset '" + name + "' belongs to '" + to_string(expected) + "', not '" + to_string(scenario) +
                      "'");
  return cfg;
}

void apply_config_text(RunConfig& cfg, const std::string& text) {
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string v = trim(line.substr(eq + 1));
    if (key == "n_dipoles") cfg.n_values = parse_int_list(key, v);
    else if (key == "mass0") cfg.ruler.mass0 = parse_double(key, v);
    else if (key == "stiffness0") cfg.ruler.stiffness0 = parse_double(key, v);
    else if (key == "spacing") cfg.ruler.spacing = parse_double(key, v);
    else if (key == "scaling_exponent") cfg.ruler.scaling_exponent = parse_double(key, v);
    else if (key == "hbar") cfg.ruler.hbar = parse_double(key, v);
    else if (key == "model") {
      if (v == "dimensionless") cfg.ion_kind = IonKind::dimensionless;
      else if (v == "physical") cfg.ion_kind = IonKind::physical;
      else throw ConfigError("model must be dimensionless or physical, got '" + v + "'");
    } else if (key == "lambda") cfg.lambdas = parse_double_list(key, v);
    else if (key == "ion_mass") cfg.physical.ion_mass = parse_double(key, v);
    else if (key == "ion_charge") cfg.physical.ion_charge = parse_double(key, v);
    else if (key == "dipole_charge") cfg.physical.dipole_charge = parse_double(key, v);
    else if (key == "dipole_separation") cfg.physical.dipole_separation = parse_double(key, v);
    else if (key == "distance") cfg.physical.distance = parse_double(key, v);
    else if (key == "eps0") cfg.physical.eps0 = parse_double(key, v);
    else if (key == "separations") cfg.separations = parse_int_list(key, v);
    else if (key == "c") cfg.cs = parse_double_list(key, v);
    else if (key == "site") cfg.site = parse_int(key, v);
    else if (key == "site2") {
      if (v.empty() || v == "none") cfg.site2.reset();
      else cfg.site2 = parse_int(key, v);
    } else if (key == "coherence_method") cfg.coherence_method = parse_method(v);
    else if (key == "switch_factor") cfg.switch_factor = parse_double(key, v);
    else if (key == "time_factor") cfg.time_factor = parse_double(key, v);
    else if (key == "threads") cfg.threads = parse_int(key, v);
    else throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  apply_config_text(cfg, ss.str());
}

std::string config_schema() {
  return "n_dipoles         odd integers >= 3; list or range first:last[:step]\n"
         "mass0, stiffness0 unscaled dipole mass and spring constant (default 1)\n"
         "scaling_exponent  s in m_r = N^s m_r0, k_r = N^s k_r0 (default 0)\n"
         "spacing, hbar     lattice spacing a_r and hbar (default 1)\n"
         "model             dimensionless | physical\n"
         "lambda            coupling strengths for the dimensionless model; list\n"
         "ion_mass, ion_charge, dipole_charge, dipole_separation, distance, eps0\n"
         "                  physical model parameters\n"
         "separations       ion site separations |i1 - i2|; list or range\n"
         "c                 box precision parameters; list\n"
         "site, site2       response ion site(s); site2 = none for a single site\n"
         "coherence_method  longtime | asymptotic | quadrature\n"
         "switch_factor     Omega_1 delta_t for finite-time coherence (default 50)\n"
         "time_factor       t / delta_t for finite-time coherence (default 10)\n"
         "threads           worker threads\n";
}

void Table::write_csv(std::ostream& os) const {
  for (std::size_t j = 0; j < columns.size(); ++j) os << (j ? "," : "") << columns[j];
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < row.size(); ++j) os << (j ? "," : "") << cell_text(row[j]);
    os << '\n';
  }
}

void Table::write_json(std::ostream& os) const {
  nlohmann::json j;
  j["columns"] = columns;
  j["rows"] = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json r;
    for (std::size_t k = 0; k < row.size(); ++k) r[columns[k]] = cell_json(row[k]);
    j["rows"].push_back(r);
  }
  if (!audit.empty()) {
    j["audit"] = nlohmann::json::array();
    for (const auto& a : audit) j["audit"].push_back(nlohmann::json::parse(a));
  }
  if (!warnings.empty()) j["warnings"] = warnings;
  os << j.dump(2) << '\n';
}

Table run_modes(const RunConfig& cfg) {
  cfg.validate();
  const ModeBasis basis = build_mode_basis(ruler_for(cfg, cfg.n_values.front()));
  Table t;
  t.columns = {"alpha", "n", "u", "omega"};
  for (int a = 1; a <= basis.mode_count(); ++a)
    for (int n = -basis.half(); n <= basis.half(); ++n)
      t.rows.push_back({std::int64_t{a}, std::int64_t{n}, basis.u(a, n), basis.Omega(a)});
  return t;
}

Table run_coherence_sweep(const RunConfig& cfg) {
  cfg.validate();
  Table t;
  t.columns = {"N", "lambda", "i1", "i2", "s", "C_I"};
  const auto lambdas = sweep_lambdas(cfg);
  if (cfg.n_values.empty() || cfg.separations.empty() || lambdas.empty()) {
    t.warnings.push_back("empty grid: nothing to compute");
    return t;
  }
  struct Point {
    int n;
    double lambda;
    int sep;
  };
  std::vector<Point> grid;
  for (int n : cfg.n_values)
    for (double l : lambdas)
      for (int sep : cfg.separations) grid.push_back({n, l, sep});
  std::map<int, ModeBasis> bases;
  for (int n : cfg.n_values) bases.emplace(n, build_mode_basis(ruler_for(cfg, n)));

  const auto rows = run_grid<std::vector<Cell>>(grid.size(), cfg.threads, [&](std::size_t k) {
    const Point& p = grid[k];
    const ModeBasis& basis = bases.at(p.n);
    const IonModel model = model_for(cfg, basis, p.lambda);
    const int i1 = placement_i1(p.sep), i2 = i1 + p.sep;
    double ci = 0.0;
    if (cfg.coherence_method == FMethod::long_time) {
      ci = coherence_longtime(i1, i2, model, basis);
    } else {
      const SwitchingProfile sw = SwitchingProfile::slow(basis, cfg.switch_factor);
      ci = coherence_t(i1, i2, cfg.time_factor * sw.delta_t, sw, model, basis, cfg.coherence_method);
    }
    return std::vector<Cell>{std::int64_t{p.n}, model.lambda(), std::int64_t{i1}, std::int64_t{i2},
                             cfg.ruler.scaling_exponent, ci};
  });
  t.rows = rows;
  return t;
}

Table run_response(const RunConfig& cfg) {
  cfg.validate();
  const ModeBasis basis = build_mode_basis(ruler_for(cfg, cfg.n_values.front()));
  const IonModel model = model_for(cfg, basis, cfg.lambdas.empty() ? 0.0 : cfg.lambdas.front());
  const ResponseProfile p =
      cfg.site2 ? response_superposition(cfg.site, *cfg.site2, model, basis) : response_single(cfg.site, model, basis);
  Table t;
  t.columns = {"n", "mean", "sigma"};
  for (int n = -basis.half(); n <= basis.half(); ++n)
    t.rows.push_back({std::int64_t{n}, p.mean_at(n), p.sigma_at(n)});
  return t;
}

Table run_cstar_sweep(const RunConfig& cfg) {
  cfg.validate();
  Table t;
  t.columns = {"N", "lambda", "c", "separation", "cstar"};
  const auto lambdas = sweep_lambdas(cfg);
  if (cfg.n_values.empty() || cfg.separations.empty() || lambdas.empty() || cfg.cs.empty()) {
    t.warnings.push_back("empty grid: nothing to compute");
    return t;
  }
  struct Point {
    int n;
    double lambda;
    double c;
    int sep;
  };
  std::vector<Point> grid;
  for (int n : cfg.n_values)
    for (double l : lambdas)
      for (double c : cfg.cs)
        for (int sep : cfg.separations) grid.push_back({n, l, c, sep});
  std::map<int, ModeBasis> bases;
  for (int n : cfg.n_values) bases.emplace(n, build_mode_basis(ruler_for(cfg, n)));

  struct Out {
    std::vector<Cell> row;
    std::string audit;
    bool underflow = false;
  };
  const auto outs = run_grid<Out>(grid.size(), cfg.threads, [&](std::size_t k) {
    const Point& p = grid[k];
    const ModeBasis& basis = bases.at(p.n);
    const IonModel model = model_for(cfg, basis, p.lambda);
    const int i1 = placement_i1(p.sep);
    const CStarResult r = cstar(i1, i1 + p.sep, p.c, model, basis);
    nlohmann::json a = nlohmann::json::parse(r.to_json());
    a["N"] = p.n;
    a["lambda"] = model.lambda();
    return Out{{std::int64_t{p.n}, model.lambda(), p.c, std::int64_t{p.sep}, r.cstar}, a.dump(), r.underflow};
  });
  for (std::size_t k = 0; k < outs.size(); ++k) {
    t.rows.push_back(outs[k].row);
    t.audit.push_back(outs[k].audit);
    if (outs[k].underflow)
      t.warnings.push_back("row " + std::to_string(k) + ": diagonal term below 1e-300; see log_cstar in the audit");
  }
  return t;
}

RegimeReport run_validate(const RunConfig& cfg) {
  cfg.validate();
  const ModeBasis basis = build_mode_basis(ruler_for(cfg, cfg.n_values.front()));
  const IonModel model = model_for(cfg, basis, cfg.lambdas.empty() ? 0.0 : cfg.lambdas.front());
  return validate_regime(model, basis);
}

}  // namespace qruler
