#include "mlqd/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mlqd::config {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw std::invalid_argument(key + ": " + what);
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    fail(key, "expected a number, got '" + v + "'");
  }
  if (used != v.size() || !std::isfinite(d)) fail(key, "expected a number, got '" + v + "'");
  return d;
}

double positive(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (!(d > 0.0)) fail(key, "must be > 0");
  return d;
}

long long to_integer(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long long n = 0;
  try {
    n = std::stoll(v, &used);
  } catch (const std::exception&) {
    fail(key, "expected an integer, got '" + v + "'");
  }
  if (used != v.size()) fail(key, "expected an integer, got '" + v + "'");
  return n;
}

std::size_t count(const std::string& key, const std::string& v, long long min) {
  const long long n = to_integer(key, v);
  if (n < min) fail(key, "must be >= " + std::to_string(min));
  return static_cast<std::size_t>(n);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "on" || v == "1") return true;
  if (v == "false" || v == "off" || v == "0") return false;
  fail(key, "expected true/false, got '" + v + "'");
}

driver::BoundarySpec to_boundary(const std::string& key, const std::string& v) {
  if (v == "vacuum") return driver::BoundarySpec::vacuum();
  const std::string prefix = "planckian:";
  if (v.rfind(prefix, 0) == 0) {
    return driver::BoundarySpec::planckian(positive(key, trim(v.substr(prefix.size()))));
  }
  fail(key, "expected 'vacuum' or 'planckian:<T>', got '" + v + "'");
}

const std::vector<std::string> kRequired = {"domain.lx", "domain.ly", "mesh.h_mat",
                                            "mesh.h_moc", "time.dt", "time.steps"};

bool divides(double extent, double h) {
  const double n = extent / h;
  return std::round(n) >= 1.0 && std::abs(n - std::round(n)) <= 1e-9 * std::max(1.0, n);
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& source) {
  RunConfig cfg;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"domain.lx", [&](auto& k, auto& v) { cfg.lx = positive(k, v); }},
      {"domain.ly", [&](auto& k, auto& v) { cfg.ly = positive(k, v); }},
      {"mesh.h_mat", [&](auto& k, auto& v) { cfg.h_mat = positive(k, v); }},
      {"mesh.h_moc", [&](auto& k, auto& v) { cfg.h_moc = positive(k, v); }},
      {"quadrature.n_polar", [&](auto& k, auto& v) { cfg.n_polar = count(k, v, 1); }},
      {"quadrature.n_azimuthal", [&](auto& k, auto& v) { cfg.n_azimuthal = count(k, v, 1); }},
      {"quadrature.file", [&](auto&, auto& v) { cfg.quadrature_file = v; }},
      {"groups.count", [&](auto& k, auto& v) { cfg.group_count = count(k, v, 1); }},
      {"groups.nu_min", [&](auto& k, auto& v) { cfg.nu_min = positive(k, v); }},
      {"groups.nu_max", [&](auto& k, auto& v) { cfg.nu_max = positive(k, v); }},
      {"groups.file", [&](auto&, auto& v) { cfg.group_file = v; }},
      {"physics.c", [&](auto& k, auto& v) { cfg.constants.c = positive(k, v); }},
      {"physics.a_r", [&](auto& k, auto& v) { cfg.constants.a_r = positive(k, v); }},
      {"material.cv", [&](auto& k, auto& v) { cfg.cv = positive(k, v); }},
      {"material.opacity",
       [&](auto& k, auto& v) {
         if (v == "fleck-cummings") {
           cfg.opacity = physics::OpacityModel::Kind::fleck_cummings;
         } else if (v == "constant") {
           cfg.opacity = physics::OpacityModel::Kind::constant;
         } else {
           fail(k, "expected 'fleck-cummings' or 'constant', got '" + v + "'");
         }
       }},
      {"material.kappa0", [&](auto& k, auto& v) { cfg.kappa0 = positive(k, v); }},
      {"material.order", [&](auto& k, auto& v) { cfg.opacity_order = count(k, v, 1); }},
      {"boundary.left", [&](auto& k, auto& v) { cfg.boundary[0] = to_boundary(k, v); }},
      {"boundary.right", [&](auto& k, auto& v) { cfg.boundary[1] = to_boundary(k, v); }},
      {"boundary.bottom", [&](auto& k, auto& v) { cfg.boundary[2] = to_boundary(k, v); }},
      {"boundary.top", [&](auto& k, auto& v) { cfg.boundary[3] = to_boundary(k, v); }},
      {"initial.temperature", [&](auto& k, auto& v) { cfg.initial_temperature = positive(k, v); }},
      {"time.dt", [&](auto& k, auto& v) { cfg.time.dt = positive(k, v); }},
      {"time.steps", [&](auto& k, auto& v) { cfg.time.steps = count(k, v, 0); }},
      {"iteration.eps_outer", [&](auto& k, auto& v) { cfg.iteration.eps_outer = positive(k, v); }},
      {"iteration.eps_inner", [&](auto& k, auto& v) { cfg.iteration.eps_inner = positive(k, v); }},
      {"iteration.max_outer",
       [&](auto& k, auto& v) { cfg.iteration.max_outer = static_cast<int>(count(k, v, 1)); }},
      {"iteration.max_inner",
       [&](auto& k, auto& v) { cfg.iteration.max_inner = static_cast<int>(count(k, v, 1)); }},
      {"output.dir", [&](auto&, auto& v) { cfg.output_dir = v; }},
      {"output.snapshot_interval",
       [&](auto& k, auto& v) {
         cfg.snapshot_interval = to_double(k, v);
         if (cfg.snapshot_interval < 0.0) fail(k, "must be >= 0");
       }},
      {"loqd.cross_terms", [&](auto& k, auto& v) { cfg.cross_terms = to_bool(k, v); }},
      {"run.threads", [&](auto& k, auto& v) { cfg.threads = static_cast<int>(count(k, v, 0)); }},
  };

  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw std::invalid_argument(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) throw std::invalid_argument(where + ": unknown key '" + key + "'");
    if (!seen.insert(key).second) throw std::invalid_argument(where + ": duplicate key '" + key + "'");
    if (value.empty()) throw std::invalid_argument(where + ": " + key + ": empty value");
    it->second(key, value);
  }

  std::string missing;
  for (const auto& k : kRequired) {
    if (!seen.count(k)) missing += (missing.empty() ? "" : ", ") + k;
  }
  if (!missing.empty()) throw std::invalid_argument(source + ": missing required keys: " + missing);
  validate(cfg);
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

void validate(const RunConfig& cfg) {
  if (!divides(cfg.lx, cfg.h_mat)) fail("mesh.h_mat", "h_mat must divide Lx");
  if (!divides(cfg.ly, cfg.h_mat)) fail("mesh.h_mat", "h_mat must divide Ly");
  if (cfg.group_file.empty() && !(cfg.nu_max > cfg.nu_min)) {
    fail("groups.nu_max", "must exceed groups.nu_min");
  }
  if (cfg.iteration.eps_inner > cfg.iteration.eps_outer) {
    fail("iteration.eps_inner", "must not exceed iteration.eps_outer");
  }
  if (cfg.iteration.eps_outer > 1.0) fail("iteration.eps_outer", "must be <= 1");
}

driver::Problem make_problem(const RunConfig& cfg) { return make_problem(cfg, cfg.h_mat, cfg.h_moc); }

driver::Problem make_problem(const RunConfig& cfg, double h_mat, double h_moc) {
  driver::Problem p;
  p.grid = mesh::MaterialGrid::with_cell_width(cfg.lx, cfg.ly, h_mat);
  p.quadrature = cfg.quadrature_file.empty()
                     ? quadrature::build_product_quadrature(cfg.n_polar, cfg.n_azimuthal)
                     : quadrature::load_quadrature(cfg.quadrature_file);
  if (!cfg.group_file.empty()) {
    p.groups = physics::FrequencyGrid::from_file(cfg.group_file);
  } else if (cfg.group_count == 1) {
    p.groups = physics::FrequencyGrid({0.0, cfg.nu_max});
  } else {
    p.groups = physics::FrequencyGrid::log_spaced(cfg.group_count, cfg.nu_min, cfg.nu_max);
  }
  p.opacity = cfg.opacity == physics::OpacityModel::Kind::fleck_cummings
                  ? physics::OpacityModel::fleck_cummings(cfg.kappa0, cfg.opacity_order)
                  : physics::OpacityModel::constant(cfg.kappa0, cfg.opacity_order);
  p.constants = cfg.constants;
  p.eos.cv = cfg.cv.value_or(0.5917 * cfg.constants.a_r);
  p.boundary = cfg.boundary;
  p.h_moc = h_moc;
  p.initial_temperature = cfg.initial_temperature;
  p.cross_terms = cfg.cross_terms;
  return p;
}

}  // namespace mlqd::config
