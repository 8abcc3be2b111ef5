// Command-line front end. Talks to the solver only through the C API.
#include <CLI11.hpp>
#include <cstdio>
#include <string>
#include <vector>

#include "hhflow/hhflow.h"

namespace {

int report_error(hh_status st, const char* what) {
  std::fprintf(stderr, "hhflow %s: %s\n", what, hh_last_error());
  return static_cast<int>(st);
}

int cmd_evolve(const std::string& config_path) {
  hh_config* cfg = nullptr;
  hh_status st = hh_config_load(config_path.c_str(), &cfg);
  if (st != HH_OK) return report_error(st, "evolve");
  hh_run* run = nullptr;
  st = hh_evolve(cfg, nullptr, &run);
  if (st != HH_OK) {
    report_error(st, "evolve");
    if (run) std::fprintf(stderr, "partial output in %s\n", hh_run_output_dir(run));
  } else {
    std::printf("output_dir: %s\nrecords: %zu\nfinal_time: %.17g\nfinal_energy: %.17g\ncalibration: %s\nwall_time_s: %.3f\n",
                hh_run_output_dir(run), hh_run_records(run), hh_run_final_time(run), hh_run_final_energy(run),
                hh_run_calibration_source(run), hh_run_wall_time(run));
  }
  hh_run_free(run);
  hh_config_free(cfg);
  return static_cast<int>(st);
}

int cmd_check(const std::string& suite, int M, std::uint64_t seed) {
  hh_report* rep = nullptr;
  const hh_status st = hh_check(suite.c_str(), M, seed, nullptr, &rep);
  if (rep) std::fputs(hh_report_json(rep), stdout);
  if (st != HH_OK) report_error(st, "check");
  hh_report_free(rep);
  return static_cast<int>(st);
}

int cmd_calibrate(const std::vector<double>& s, const std::vector<int>& M) {
  hh_calibration* table = nullptr;
  const hh_status st = hh_calibrate(s.data(), s.size(), M.data(), M.size(), nullptr, &table);
  if (st != HH_OK) return report_error(st, "calibrate");
  std::fputs(hh_calibration_json(table), stdout);
  hh_calibration_free(table);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudospectral half-harmonic gradient flow solver"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(hh_version()));
  app.footer(std::string("Output directory override: $") + hh_output_dir_env() +
             "\nExit codes: 0 ok, 2 config error, 3 numerical failure, 4 check failure");

  std::string config_path;
  auto* evolve = app.add_subcommand("evolve", "Run a configured flow and write trajectory.csv and manifest.json");
  evolve->add_option("--config", config_path, "Experiment config file (key = value lines)")->required();

  std::string suite;
  int M = 0;
  std::uint64_t seed = 1;
  auto* check = app.add_subcommand("check", "Run an identity, geometry or crossform check suite");
  check->add_option("--suite", suite, "identity | geometry | crossform")
      ->required()
      ->check(CLI::IsMember({"identity", "geometry", "crossform"}));
  check->add_option("--M", M, "Grid size (even, >= 8)")->required();
  check->add_option("--seed", seed, "Seed for random data")->capture_default_str();

  std::vector<double> s_list;
  std::vector<int> m_list;
  auto* calibrate = app.add_subcommand("calibrate", "Tabulate C_disc and C_dual into calibration.json");
  calibrate->add_option("--s", s_list, "Orders, e.g. 0.25,0.5")->required()->delimiter(',');
  calibrate->add_option("--M", m_list, "Grid sizes, e.g. 128,256,512")->required()->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(HH_ERR_CONFIG);
  }

  if (*evolve) return cmd_evolve(config_path);
  if (*check) return cmd_check(suite, M, seed);
  return cmd_calibrate(s_list, m_list);
}
