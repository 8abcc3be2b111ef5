#include "hhflow/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "hhflow/error.hpp"
#include "hhflow/initial_data.hpp"

namespace hhflow {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& why) { fail(ErrorKind::Config, key + ": " + why); }

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) {
    bad(key, "expected a finite number, got '" + t + "'");
  }
  return v;
}

long long parse_int(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) bad(key, "expected an integer, got '" + t + "'");
  return v;
}

std::size_t parse_count(const std::string& key, const std::string& text) {
  const long long v = parse_int(key, text);
  if (v < 0) bad(key, "must be non-negative");
  return static_cast<std::size_t>(v);
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  bad(key, "expected true or false, got '" + t + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  const std::string t = trim(text);
  if (t.empty()) return out;
  std::stringstream ss(t);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"grid.M",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         const long long m = parse_int(k, v);
         if (m < 8 || m % 2 != 0) bad(k, "must be an even integer >= 8, got " + trim(v));
         c.M = static_cast<std::size_t>(m);
       }},
      {"manifold.type", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.manifold_type = trim(v); }},
      {"manifold.dim", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.dim = parse_count(k, v); }},
      {"manifold.axes", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.axes = parse_list(k, v); }},
      {"manifold.R", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.torus_R = parse_double(k, v); }},
      {"manifold.r", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.torus_r = parse_double(k, v); }},
      {"manifold.center", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.center = parse_list(k, v); }},
      {"manifold.normal", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.normal = parse_list(k, v); }},
      {"manifold.radius", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.radius = parse_double(k, v); }},
      {"manifold.tube_radius",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.tube_radius = parse_double(k, v); }},
      {"manifold.newton_tol",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.newton_tol = parse_double(k, v); }},
      {"manifold.newton_max_iter",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.newton_max_iter = static_cast<int>(parse_int(k, v));
       }},
      {"flow.formulation",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         const auto f = parse_formulation(trim(v));
         if (!f) bad(k, "unknown formulation '" + trim(v) + "' (projection, divergence, quadratic, hypersurface, sphere)");
         c.formulation = *f;
       }},
      {"solver.dt", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.dt = parse_double(k, v); }},
      {"solver.scheme",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         const auto s = parse_scheme(trim(v));
         if (!s) bad(k, "unknown scheme '" + trim(v) + "' (imex_euler, imex_midpoint)");
         c.scheme = *s;
       }},
      {"solver.reproject", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.reproject = parse_bool(k, v); }},
      {"solver.t_end", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.t_end = parse_double(k, v); }},
      {"solver.constraint_abort_threshold",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.constraint_abort_threshold = parse_double(k, v);
       }},
      {"solver.gauss_order",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.gauss_order = parse_count(k, v); }},
      {"initial.generator", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.generator = trim(v); }},
      {"initial.epsilon", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.epsilon = parse_double(k, v); }},
      {"initial.seed",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         const std::string t = trim(v);
         std::uint64_t s = 0;
         const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), s);
         if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) bad(k, "expected a non-negative integer");
         c.seed = s;
       }},
      {"initial.base_point",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.base_point = parse_list(k, v); }},
      {"initial.k", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.k = static_cast<int>(parse_int(k, v)); }},
      {"initial.a", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.mobius_a = parse_double(k, v); }},
      {"initial.theta0", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.theta0 = parse_double(k, v); }},
      {"initial.alpha", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.alpha = parse_double(k, v); }},
      {"initial.phi0", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.phi0 = parse_double(k, v); }},
      {"initial.beta", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.beta = parse_double(k, v); }},
      {"initial.point", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.point = parse_list(k, v); }},
      {"diagnostics.stride",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.stride = parse_count(k, v); }},
      {"diagnostics.radii", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.radii = parse_list(k, v); }},
      {"diagnostics.snapshot_times",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.snapshot_times = parse_list(k, v); }},
      {"output.dir", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.output_dir = trim(v); }},
      {"calibration.file", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.calibration_file = trim(v); }},
  };
  return table;
}

void apply(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  const auto it = setters().find(key);
  if (it == setters().end()) bad(key, "unknown key");
  it->second(cfg, key, value);
}

Vec to_vec(const std::vector<double>& v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_number(v[i]);
  }
  return out;
}

void validate(const ExperimentConfig& c) {
  if (c.M < 8 || c.M % 2 != 0) bad("grid.M", "must be an even integer >= 8");
  if (c.gauss_order < 1 || c.gauss_order > 256) bad("solver.gauss_order", "must be in [1, 256]");
  if (c.dt && !(*c.dt > 0.0)) bad("solver.dt", "must be positive");
  if (!(c.t_end >= 0.0)) bad("solver.t_end", "must be non-negative");
  if (!(c.constraint_abort_threshold > 0.0)) bad("solver.constraint_abort_threshold", "must be positive");
  if (!(c.newton_tol > 0.0)) bad("manifold.newton_tol", "must be positive");
  if (c.newton_max_iter < 1) bad("manifold.newton_max_iter", "must be >= 1");
  if (c.tube_radius < 0.0) bad("manifold.tube_radius", "must be non-negative");
  if (c.stride < 1) bad("diagnostics.stride", "must be >= 1");
  for (double R : c.radii)
    if (!(R > 0.0)) bad("diagnostics.radii", "radii must be positive");
  for (double t : c.snapshot_times)
    if (t < 0.0 || t > c.t_end) bad("diagnostics.snapshot_times", "times must lie in [0, solver.t_end]");

  const Manifold N = build_manifold(c);
  try {
    require_compatible(N, c.formulation);
  } catch (const Error& e) {
    bad("flow.formulation", e.what());
  }

  const std::size_t n = N.ambient_dim();
  if (c.generator == "perturbation") {
    if (!c.seed) bad("initial.seed", "required by the perturbation generator");
    if (!(c.epsilon >= 0.0)) bad("initial.epsilon", "must be non-negative");
    if (!c.base_point.empty() && c.base_point.size() != n)
      bad("initial.base_point", "needs " + std::to_string(n) + " coordinates");
  } else if (c.generator == "great_circle") {
    if (c.manifold_type != "sphere") bad("initial.generator", "great_circle needs a sphere target");
  } else if (c.generator == "mobius") {
    if (c.manifold_type != "sphere") bad("initial.generator", "mobius needs a sphere target");
    if (!(std::abs(c.mobius_a) < 1.0)) bad("initial.a", "must satisfy |a| < 1");
  } else if (c.generator == "torus_loop") {
    if (c.manifold_type != "torus") bad("initial.generator", "torus_loop needs a torus target");
  } else if (c.generator == "circle_loop") {
    if (c.manifold_type != "embedded_circle") bad("initial.generator", "circle_loop needs an embedded_circle target");
  } else if (c.generator == "constant") {
    if (c.point.size() != n) bad("initial.point", "needs " + std::to_string(n) + " coordinates");
  } else {
    bad("initial.generator",
        "unknown generator '" + c.generator + "' (perturbation, great_circle, mobius, torus_loop, circle_loop, constant)");
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& name) {
  ExperimentConfig cfg;
  cfg.name = name;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::map<std::string, std::size_t> seen;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      fail(ErrorKind::Config, "line " + std::to_string(lineno) + ": expected 'key = value', got '" + t + "'");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (seen.count(key)) {
      bad(key, "repeated on line " + std::to_string(lineno) + " (first on line " + std::to_string(seen[key]) + ")");
    }
    seen[key] = lineno;
    apply(cfg, key, value);
    cfg.raw.emplace_back(key, value);
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Config, "cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::filesystem::path(path).stem().string());
}

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  apply(cfg, key, value);
  auto it = std::find_if(cfg.raw.begin(), cfg.raw.end(), [&](const auto& kv) { return kv.first == key; });
  if (it != cfg.raw.end()) {
    it->second = value;
  } else {
    cfg.raw.emplace_back(key, value);
  }
  validate(cfg);
}

std::vector<std::pair<std::string, std::string>> config_echo(const ExperimentConfig& c) {
  std::vector<std::pair<std::string, std::string>> e = {
      {"grid.M", std::to_string(c.M)},
      {"manifold.type", c.manifold_type},
      {"manifold.dim", std::to_string(c.dim)},
      {"manifold.axes", join(c.axes)},
      {"manifold.R", format_number(c.torus_R)},
      {"manifold.r", format_number(c.torus_r)},
      {"manifold.center", join(c.center)},
      {"manifold.normal", join(c.normal)},
      {"manifold.radius", format_number(c.radius)},
      {"manifold.tube_radius", format_number(build_manifold(c).tube_radius())},
      {"manifold.newton_tol", format_number(c.newton_tol)},
      {"manifold.newton_max_iter", std::to_string(c.newton_max_iter)},
      {"flow.formulation", to_string(c.formulation)},
      {"solver.dt", format_number(c.dt ? *c.dt : default_time_step(c.M))},
      {"solver.scheme", to_string(c.scheme)},
      {"solver.reproject", c.reproject ? "true" : "false"},
      {"solver.t_end", format_number(c.t_end)},
      {"solver.constraint_abort_threshold", format_number(c.constraint_abort_threshold)},
      {"solver.gauss_order", std::to_string(c.gauss_order)},
      {"initial.generator", c.generator},
      {"initial.epsilon", format_number(c.epsilon)},
      {"initial.seed", c.seed ? std::to_string(*c.seed) : ""},
      {"initial.base_point", join(c.base_point)},
      {"initial.k", std::to_string(c.k)},
      {"initial.a", format_number(c.mobius_a)},
      {"initial.theta0", format_number(c.theta0)},
      {"initial.alpha", format_number(c.alpha)},
      {"initial.phi0", format_number(c.phi0)},
      {"initial.beta", format_number(c.beta)},
      {"initial.point", join(c.point)},
      {"diagnostics.stride", std::to_string(c.stride)},
      {"diagnostics.radii", join(c.radii)},
      {"diagnostics.snapshot_times", join(c.snapshot_times)},
      {"output.dir", c.output_dir},
      {"calibration.file", c.calibration_file},
  };
  std::sort(e.begin(), e.end());
  return e;
}

Manifold build_manifold(const ExperimentConfig& c) {
  try {
    Manifold N = [&] {
      if (c.manifold_type == "sphere") return Manifold::sphere(c.dim, c.tube_radius);
      if (c.manifold_type == "ellipsoid") return Manifold::ellipsoid(c.axes, c.tube_radius);
      if (c.manifold_type == "torus") return Manifold::torus(c.torus_R, c.torus_r, c.tube_radius);
      if (c.manifold_type == "embedded_circle") {
        const std::vector<double> center = c.center.empty() ? std::vector<double>{0, 0, 0} : c.center;
        const std::vector<double> normal = c.normal.empty() ? std::vector<double>{0, 0, 1} : c.normal;
        return Manifold::embedded_circle(to_vec(center), to_vec(normal), c.radius, c.tube_radius);
      }
      bad("manifold.type", "unknown manifold '" + c.manifold_type + "' (sphere, ellipsoid, torus, embedded_circle)");
    }();
    N.set_newton(c.newton_tol, c.newton_max_iter);
    return N;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config) throw;
    bad("manifold", e.what());
  }
}

GridFunction build_initial_datum(const ExperimentConfig& c, const Manifold& N, const GridPtr& grid) {
  const std::size_t n = N.ambient_dim();
  if (c.generator == "perturbation") {
    Vec p0;
    if (!c.base_point.empty()) {
      p0 = N.closest_point(to_vec(c.base_point));
    } else {
      p0 = Vec::Zero(static_cast<Eigen::Index>(n));
      p0(static_cast<Eigen::Index>(n - 1)) = 1.0;
      p0 = N.closest_point(p0);
    }
    return perturbation_datum(N, grid, p0, c.epsilon, *c.seed);
  }
  if (c.generator == "great_circle") return great_circle_datum(grid, n, c.k);
  if (c.generator == "mobius") return mobius_datum(grid, n, c.mobius_a);
  if (c.generator == "torus_loop") return torus_loop_datum(N, grid, c.theta0, c.alpha, c.phi0, c.beta);
  if (c.generator == "circle_loop") return circle_loop_datum(N, grid, c.k);
  if (c.generator == "constant") return constant_datum(grid, N.closest_point(to_vec(c.point)));
  bad("initial.generator", "unknown generator '" + c.generator + "'");
}

SolverOptions build_solver_options(const ExperimentConfig& c) {
  SolverOptions o;
  o.dt = c.dt ? *c.dt : default_time_step(c.M);
  o.scheme = c.scheme;
  o.reproject = c.reproject;
  o.t_end = c.t_end;
  o.constraint_abort_threshold = c.constraint_abort_threshold;
  o.gauss_order = c.gauss_order;
  return o;
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_fixed17(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

}  // namespace hhflow
