#include "hhflow/runner.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "hhflow/error.hpp"
#include "hhflow/frac_calc.hpp"

#ifndef HHFLOW_VERSION
#define HHFLOW_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace hhflow {

namespace {

std::string csv_header(const ExperimentConfig& cfg, std::size_t n) {
  std::string h = "t,energy,constraint_violation,harmonic_residual";
  for (double R : cfg.radii) h += ",eps_R_" + format_number(R);
  h += ",sup_variation";
  for (std::size_t c = 0; c < n; ++c) h += ",mean_" + std::to_string(c);
  return h + "\n";
}

std::string csv_row(const DiagnosticsRecord& r) {
  std::string row = format_fixed17(r.t) + "," + format_fixed17(r.energy) + "," +
                    format_fixed17(r.constraint_violation) + "," + format_fixed17(r.harmonic_residual);
  for (double e : r.eps_R) row += "," + format_fixed17(e);
  row += "," + format_fixed17(r.sup_variation);
  for (Eigen::Index c = 0; c < r.mean_point.size(); ++c) row += "," + format_fixed17(r.mean_point(c));
  return row + "\n";
}

ordered_json column_docs(const ExperimentConfig& cfg, std::size_t n) {
  ordered_json cols = ordered_json::array();
  auto add = [&](const std::string& name, const std::string& doc) { cols.push_back({{"name", name}, {"description", doc}}); };
  add("t", "time of the record");
  add("energy", "E_1/2(u) = 1/2 int |(-Delta)^{1/4} u|^2, spectral");
  add("constraint_violation", "max over nodes of |u - pi(u)|^2");
  add("harmonic_residual", "L2 norm of dpi(u) (-Delta)^{1/2} u");
  for (double R : cfg.radii)
    add("eps_R_" + format_number(R), "max over node centres of the local energy in the chord ball of radius R");
  add("sup_variation", "max over nodes of |u(x) - mean u|");
  for (std::size_t c = 0; c < n; ++c) add("mean_" + std::to_string(c), "component " + std::to_string(c) + " of mean u");
  return cols;
}

std::string snapshot_csv(const GridFunction& u) {
  std::string out = "x";
  for (std::size_t c = 0; c < u.components(); ++c) out += ",u_" + std::to_string(c);
  out += "\n";
  for (std::size_t j = 0; j < u.size(); ++j) {
    out += format_fixed17(u.grid().node(j));
    for (std::size_t c = 0; c < u.components(); ++c) out += "," + format_fixed17(u(j, c));
    out += "\n";
  }
  return out;
}

struct CalibrationUse {
  double c_disc = 0.0;
  double c_dual = 0.0;
  std::string source;
};

CalibrationUse resolve_calibration(const ExperimentConfig& cfg) {
  CalibrationUse use;
  if (cfg.calibration_file.empty()) {
    use.source = "on-the-fly (no calibration file configured)";
  } else if (!fs::exists(cfg.calibration_file)) {
    use.source = "on-the-fly (calibration file '" + cfg.calibration_file + "' not found)";
  } else {
    bool found = false;
    for (const CalibrationEntry& e : read_calibration_file(cfg.calibration_file)) {
      if (e.s == 0.5 && e.M == cfg.M) {
        install_constants(0.5, cfg.M, e.c_disc, e.c_dual);
        found = true;
      }
    }
    use.source = found ? "file:" + cfg.calibration_file
                       : "on-the-fly (no entry for s=0.5, M=" + std::to_string(cfg.M) + " in '" + cfg.calibration_file + "')";
  }
  use.c_disc = calibrate_constant(0.5, cfg.M);
  use.c_dual = duality_constant(0.5, cfg.M);
  return use;
}

}  // namespace

const char* code_version() noexcept { return HHFLOW_VERSION; }

std::string resolve_output_dir(const std::string& override_dir, const std::string& configured,
                               const std::string& fallback) {
  if (!override_dir.empty()) return override_dir;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  if (!configured.empty()) return configured;
  return fallback;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  std::error_code ec;
  if (target.has_parent_path()) fs::create_directories(target.parent_path(), ec);
  if (ec) fail(ErrorKind::Io, "cannot create directory '" + target.parent_path().string() + "': " + ec.message());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) fail(ErrorKind::Io, "write to '" + tmp.string() + "' failed");
  }
  fs::rename(tmp, target, ec);
  if (ec) fail(ErrorKind::Io, "cannot rename '" + tmp.string() + "' to '" + path + "': " + ec.message());
}

EvolveSummary run_evolve(const ExperimentConfig& cfg, const std::string& output_dir_override) {
  const auto t0 = std::chrono::steady_clock::now();
  EvolveSummary summary;
  summary.output_dir = resolve_output_dir(output_dir_override, cfg.output_dir, "out/" + cfg.name);
  const fs::path dir(summary.output_dir);

  const Manifold N = build_manifold(cfg);
  const GridPtr grid = build_grid(cfg.M);
  const SolverOptions opts = build_solver_options(cfg);
  const CalibrationUse cal = resolve_calibration(cfg);
  summary.calibration_source = cal.source;
  const GridFunction u0 = build_initial_datum(cfg, N, grid);
  const std::size_t n = N.ambient_dim();

  std::string csv = csv_header(cfg, n);
  std::vector<DiagnosticsRecord> records;
  ordered_json snapshots = ordered_json::array();
  std::vector<bool> taken(cfg.snapshot_times.size(), false);

  EvolveOptions eo;
  eo.stride = cfg.stride;
  eo.radii = cfg.radii;
  eo.on_record = [&](const DiagnosticsRecord& r) {
    csv += csv_row(r);
    records.push_back(r);
  };
  eo.on_step = [&](const FlowState& st) {
    for (std::size_t i = 0; i < cfg.snapshot_times.size(); ++i) {
      const double ts = cfg.snapshot_times[i];
      if (taken[i] || st.t < ts - 1e-9 * std::max(1.0, ts)) continue;
      taken[i] = true;
      const std::string file = "snapshots/u_t" + format_number(ts) + ".csv";
      write_file_atomic((dir / file).string(), snapshot_csv(st.u));
      snapshots.push_back({{"requested_time", ts}, {"time", st.t}, {"file", file}});
    }
  };

  std::string status = "ok";
  std::string error_kind;
  bool failed = false;
  Error saved(ErrorKind::InvalidArgument, "");
  try {
    evolve(u0, N, cfg.formulation, opts, eo);
  } catch (const Error& e) {
    failed = true;
    status = "failed";
    error_kind = to_string(e.kind());
    saved = e;
  }
  summary.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  summary.records = records.size();
  if (!records.empty()) {
    summary.final_time = records.back().t;
    summary.final_energy = records.back().energy;
  }

  write_file_atomic((dir / "trajectory.csv").string(), csv);

  ordered_json manifest;
  manifest["name"] = cfg.name;
  manifest["code_version"] = code_version();
  manifest["status"] = status;
  if (failed) manifest["error"] = {{"kind", error_kind}, {"message", saved.what()}};
  ordered_json echo = ordered_json::object();
  for (const auto& [k, v] : config_echo(cfg)) echo[k] = v;
  manifest["config"] = echo;
  ordered_json raw = ordered_json::object();
  for (const auto& [k, v] : cfg.raw) raw[k] = v;
  manifest["config_as_read"] = raw;
  manifest["calibration"] = {{"s", 0.5},
                             {"M", cfg.M},
                             {"C_disc", cal.c_disc},
                             {"C_dual", cal.c_dual},
                             {"source", cal.source}};
  manifest["manifold"] = {{"name", N.name()}, {"ambient_dim", n}, {"tube_radius", N.tube_radius()}};
  manifest["steps"] = {{"dt", opts.dt}, {"t_end", opts.t_end}, {"records", records.size()}};
  manifest["wall_time_seconds"] = summary.wall_time;
  manifest["trajectory"] = {{"file", "trajectory.csv"},
                            {"float_format", "17 significant digits, '.' decimal point, no locale"},
                            {"columns", column_docs(cfg, n)}};
  manifest["snapshots"] = snapshots;
  write_file_atomic((dir / "manifest.json").string(), manifest.dump(2) + "\n");

  if (failed) throw saved;
  return summary;
}

std::string calibration_json(const std::vector<CalibrationEntry>& table) {
  ordered_json j;
  j["code_version"] = code_version();
  j["convention"] =
      "C_disc: singular quadrature times C_disc reproduces cos; C_dual: sum of |d_s cos|^2 h over |(-Delta)^{s/2} cos|^2";
  ordered_json entries = ordered_json::array();
  for (const auto& e : table) entries.push_back({{"s", e.s}, {"M", e.M}, {"C_disc", e.c_disc}, {"C_dual", e.c_dual}});
  j["entries"] = entries;
  return j.dump(2) + "\n";
}

std::vector<CalibrationEntry> run_calibrate(const std::vector<double>& s, const std::vector<std::size_t>& M,
                                            const std::string& output_dir_override) {
  require(!s.empty() && !M.empty(), ErrorKind::InvalidArgument, "calibrate: need at least one s and one M");
  std::vector<CalibrationEntry> table;
  for (double si : s) {
    for (std::size_t m : M) {
      CalibrationEntry e;
      e.s = si;
      e.M = m;
      e.c_disc = calibrate_constant(si, m);
      e.c_dual = duality_constant(si, m);
      table.push_back(e);
    }
  }
  const std::string dir = resolve_output_dir(output_dir_override, "", "out");
  write_file_atomic((fs::path(dir) / "calibration.json").string(), calibration_json(table));
  return table;
}

std::vector<CalibrationEntry> read_calibration_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot read calibration file '" + path + "'");
  std::vector<CalibrationEntry> table;
  try {
    const auto j = nlohmann::json::parse(in);
    for (const auto& e : j.at("entries")) {
      CalibrationEntry c;
      c.s = e.at("s").get<double>();
      c.M = e.at("M").get<std::size_t>();
      c.c_disc = e.at("C_disc").get<double>();
      c.c_dual = e.at("C_dual").get<double>();
      table.push_back(c);
    }
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorKind::Config, "calibration.file: malformed '" + path + "': " + ex.what());
  }
  return table;
}

bool CheckReport::passed() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return !checks.empty();
}

std::string CheckReport::to_json() const {
  ordered_json j;
  j["suite"] = suite;
  j["M"] = M;
  j["seed"] = seed;
  j["passed"] = passed();
  j["code_version"] = code_version();
  ordered_json arr = ordered_json::array();
  for (const auto& c : checks) {
    ordered_json e = {{"name", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"pass", c.pass}};
    if (!c.detail.empty()) e["detail"] = c.detail;
    arr.push_back(e);
  }
  j["checks"] = arr;
  j["wall_time_seconds"] = wall_time;
  return j.dump(2) + "\n";
}

}  // namespace hhflow
