#include "hhflow/hhflow.h"

#include <filesystem>
#include <new>
#include <string>

#include "hhflow/config.hpp"
#include "hhflow/error.hpp"
#include "hhflow/runner.hpp"

struct hh_config {
  hhflow::ExperimentConfig cfg;
  std::string scratch;
};

struct hh_run {
  hhflow::EvolveSummary summary;
};

struct hh_report {
  hhflow::CheckReport report;
  std::string json;
};

struct hh_calibration {
  std::vector<hhflow::CalibrationEntry> table;
  std::string json;
};

namespace {

thread_local std::string g_last_error;

hh_status status_for(hhflow::ErrorKind kind) {
  using hhflow::ErrorKind;
  switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::InvalidArgument:
    case ErrorKind::SizeMismatch:
    case ErrorKind::NotAHypersurface:
      return HH_ERR_CONFIG;
    case ErrorKind::OutsideTube:
    case ErrorKind::NotOnSphere:
    case ErrorKind::NewtonFailure:
    case ErrorKind::NonFinite:
    case ErrorKind::ConstraintBlowup:
      return HH_ERR_NUMERICAL;
    case ErrorKind::Io:
      return HH_ERR_RUNTIME;
  }
  return HH_ERR_RUNTIME;
}

template <class F>
hh_status guarded(F&& body) {
  try {
    g_last_error.clear();
    return body();
  } catch (const hhflow::Error& e) {
    g_last_error = std::string(hhflow::to_string(e.kind())) + ": " + e.what();
    return status_for(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return HH_ERR_RUNTIME;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return HH_ERR_RUNTIME;
  } catch (...) {
    g_last_error = "unknown failure";
    return HH_ERR_RUNTIME;
  }
}

hh_status null_argument(const char* what) {
  g_last_error = std::string("null argument: ") + what;
  return HH_ERR_CONFIG;
}

}  // namespace

extern "C" {

const char* hh_last_error(void) { return g_last_error.c_str(); }
const char* hh_version(void) { return hhflow::code_version(); }
const char* hh_output_dir_env(void) { return hhflow::kOutputDirEnv; }

hh_status hh_config_load(const char* path, hh_config** out) {
  if (!path || !out) return null_argument("path/out");
  *out = nullptr;
  return guarded([&] {
    *out = new hh_config{hhflow::load_config(path), {}};
    return HH_OK;
  });
}

hh_status hh_config_parse(const char* text, const char* name, hh_config** out) {
  if (!text || !out) return null_argument("text/out");
  *out = nullptr;
  return guarded([&] {
    *out = new hh_config{hhflow::parse_config(text, name ? name : "experiment"), {}};
    return HH_OK;
  });
}

hh_status hh_config_set(hh_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) return null_argument("cfg/key/value");
  return guarded([&] {
    hhflow::ExperimentConfig copy = cfg->cfg;
    hhflow::set_config_value(copy, key, value);
    cfg->cfg = std::move(copy);
    return HH_OK;
  });
}

const char* hh_config_get(hh_config* cfg, const char* key) {
  if (!cfg || !key) return nullptr;
  for (const auto& [k, v] : hhflow::config_echo(cfg->cfg)) {
    if (k == key) {
      cfg->scratch = v;
      return cfg->scratch.c_str();
    }
  }
  return nullptr;
}

void hh_config_free(hh_config* cfg) { delete cfg; }

hh_status hh_evolve(const hh_config* cfg, const char* output_dir, hh_run** out) {
  if (!cfg || !out) return null_argument("cfg/out");
  *out = new (std::nothrow) hh_run{};
  if (!*out) return HH_ERR_RUNTIME;
  (*out)->summary.output_dir =
      hhflow::resolve_output_dir(output_dir ? output_dir : "", cfg->cfg.output_dir, "out/" + cfg->cfg.name);
  return guarded([&] {
    (*out)->summary = hhflow::run_evolve(cfg->cfg, output_dir ? output_dir : "");
    return HH_OK;
  });
}

const char* hh_run_output_dir(const hh_run* run) { return run ? run->summary.output_dir.c_str() : ""; }
size_t hh_run_records(const hh_run* run) { return run ? run->summary.records : 0; }
double hh_run_final_time(const hh_run* run) { return run ? run->summary.final_time : 0.0; }
double hh_run_final_energy(const hh_run* run) { return run ? run->summary.final_energy : 0.0; }
double hh_run_wall_time(const hh_run* run) { return run ? run->summary.wall_time : 0.0; }
const char* hh_run_calibration_source(const hh_run* run) { return run ? run->summary.calibration_source.c_str() : ""; }
void hh_run_free(hh_run* run) { delete run; }

hh_status hh_check(const char* suite, int M, uint64_t seed, const char* output_dir, hh_report** out) {
  if (!suite || !out) return null_argument("suite/out");
  *out = nullptr;
  if (M < 8 || M % 2 != 0) {
    g_last_error = "M must be an even integer >= 8";
    return HH_ERR_CONFIG;
  }
  return guarded([&] {
    auto* r = new hh_report{hhflow::run_check(suite, static_cast<std::size_t>(M), seed), {}};
    r->json = r->report.to_json();
    *out = r;
    const std::string dir = hhflow::resolve_output_dir(output_dir ? output_dir : "", "", "");
    if (!dir.empty()) {
      const std::string file = "check_" + std::string(suite) + "_M" + std::to_string(M) + ".json";
      hhflow::write_file_atomic((std::filesystem::path(dir) / file).string(), r->json);
    }
    if (!r->report.passed()) {
      g_last_error = "check suite '" + std::string(suite) + "' failed";
      return HH_ERR_CHECK;
    }
    return HH_OK;
  });
}

int hh_report_passed(const hh_report* report) { return report && report->report.passed() ? 1 : 0; }
size_t hh_report_count(const hh_report* report) { return report ? report->report.checks.size() : 0; }

hh_status hh_report_check(const hh_report* report, size_t i, const char** name, double* value, double* threshold,
                          int* pass) {
  if (!report) return null_argument("report");
  if (i >= report->report.checks.size()) {
    g_last_error = "check index out of range";
    return HH_ERR_CONFIG;
  }
  const auto& c = report->report.checks[i];
  if (name) *name = c.name.c_str();
  if (value) *value = c.value;
  if (threshold) *threshold = c.threshold;
  if (pass) *pass = c.pass ? 1 : 0;
  return HH_OK;
}

const char* hh_report_json(const hh_report* report) { return report ? report->json.c_str() : ""; }
void hh_report_free(hh_report* report) { delete report; }

hh_status hh_calibrate(const double* s, size_t ns, const int* M, size_t nM, const char* output_dir,
                       hh_calibration** out) {
  if (!s || !M || !out) return null_argument("s/M/out");
  *out = nullptr;
  return guarded([&] {
    std::vector<double> sv(s, s + ns);
    std::vector<std::size_t> mv;
    for (size_t i = 0; i < nM; ++i) {
      if (M[i] < 8 || M[i] % 2 != 0) hhflow::fail(hhflow::ErrorKind::Config, "M: must be even integers >= 8");
      mv.push_back(static_cast<std::size_t>(M[i]));
    }
    for (double v : sv)
      if (!(v > 0.0 && v < 1.0)) hhflow::fail(hhflow::ErrorKind::Config, "s: values must lie in (0, 1)");
    auto* t = new hh_calibration{hhflow::run_calibrate(sv, mv, output_dir ? output_dir : ""), {}};
    t->json = hhflow::calibration_json(t->table);
    *out = t;
    return HH_OK;
  });
}

size_t hh_calibration_count(const hh_calibration* table) { return table ? table->table.size() : 0; }

hh_status hh_calibration_entry(const hh_calibration* table, size_t i, double* s, int* M, double* c_disc,
                               double* c_dual) {
  if (!table) return null_argument("table");
  if (i >= table->table.size()) {
    g_last_error = "calibration index out of range";
    return HH_ERR_CONFIG;
  }
  const auto& e = table->table[i];
  if (s) *s = e.s;
  if (M) *M = static_cast<int>(e.M);
  if (c_disc) *c_disc = e.c_disc;
  if (c_dual) *c_dual = e.c_dual;
  return HH_OK;
}

const char* hh_calibration_json(const hh_calibration* table) { return table ? table->json.c_str() : ""; }
void hh_calibration_free(hh_calibration* table) { delete table; }

}  // extern "C"
