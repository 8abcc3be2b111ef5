#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "hhflow/config.hpp"
#include "hhflow/error.hpp"
#include "hhflow/frac_calc.hpp"
#include "hhflow/runner.hpp"

using namespace hhflow;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"(# tiny sphere run
grid.M = 32
manifold.type = sphere
flow.formulation = projection

solver.dt = 1e-3
solver.t_end = 0.01
initial.generator = perturbation
initial.epsilon = 0.2
initial.seed = 3
diagnostics.stride = 2
diagnostics.radii = 0.5, 0.1
diagnostics.snapshot_times = 0, 0.005
)";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::current_path() / "runner_out" / name;
  fs::remove_all(d);
  return d;
}

std::string config_error(const std::string& text) {
  try {
    (void)parse_config(text);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
    return e.what();
  }
  FAIL("expected a config error for: " << text);
  return "";
}

std::vector<std::string> split_lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  for (std::string line; std::getline(is, line);) out.push_back(line);
  return out;
}

struct EnvGuard {
  EnvGuard(const char* value) {
    if (value)
      setenv(kOutputDirEnv, value, 1);
    else
      unsetenv(kOutputDirEnv);
  }
  ~EnvGuard() { unsetenv(kOutputDirEnv); }
};

}  // namespace

TEST_CASE("parsing and defaults") {
  const ExperimentConfig c = parse_config(kSmall, "tiny");
  CHECK(c.name == "tiny");
  CHECK(c.M == 32);
  CHECK(c.formulation == Formulation::Projection);
  CHECK(c.seed == 3u);
  CHECK(c.radii == std::vector<double>{0.5, 0.1});
  CHECK(c.reproject == false);
  CHECK(c.scheme == Scheme::ImexEuler);
  CHECK(c.newton_tol == 1e-10);
  CHECK(c.raw.size() == 11);
  CHECK(c.raw.front().first == "grid.M");

  const SolverOptions o = build_solver_options(parse_config("grid.M = 512\ninitial.generator = constant\ninitial.point = 0,0,1\n"));
  CHECK(o.dt == default_time_step(512));
  CHECK(o.constraint_abort_threshold == 1e-2);

  const auto echo = config_echo(c);
  for (std::size_t i = 1; i < echo.size(); ++i) CHECK(echo[i - 1].first < echo[i].first);
}

TEST_CASE("config errors name the offending key") {
  CHECK(config_error("grid.M = 33\ninitial.seed = 1\n").find("grid.M") != std::string::npos);
  CHECK(config_error("grid.M = many\n").find("grid.M") != std::string::npos);
  CHECK(config_error("grid.M = 32\nbogus.key = 1\ninitial.seed = 1\n").find("bogus.key") != std::string::npos);
  CHECK(config_error("grid.M = 32\ngrid.M = 64\ninitial.seed = 1\n").find("grid.M") != std::string::npos);
  CHECK(config_error("grid.M = 32\n").find("initial.seed") != std::string::npos);
  CHECK(config_error("initial.seed = 1\nflow.formulation = magic\n").find("flow.formulation") != std::string::npos);
  CHECK(config_error("manifold.type = torus\ninitial.generator = great_circle\n").find("initial.generator") !=
        std::string::npos);
  CHECK(config_error("manifold.type = embedded_circle\nmanifold.center = 0,0,0\nmanifold.normal = 0,0,1\n"
                     "flow.formulation = hypersurface\ninitial.generator = circle_loop\n")
            .find("flow.formulation") != std::string::npos);
  CHECK(config_error("initial.seed = 1\nsolver.dt = -1\n").find("solver.dt") != std::string::npos);
  CHECK(config_error("initial.seed = 1\nsolver.t_end = 1\ndiagnostics.snapshot_times = 2\n").find("diagnostics.snapshot_times") !=
        std::string::npos);
  CHECK(config_error("initial.seed = 1\nsolver.reproject = maybe\n").find("solver.reproject") != std::string::npos);
  CHECK(config_error("just some words\n").size() > 0);
  try {
    (void)load_config("/nonexistent/dir/x.cfg");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK((e.kind() == ErrorKind::Config || e.kind() == ErrorKind::Io));
  }
}

TEST_CASE("shipped configs parse and build") {
  for (const char* name : {"small_energy_sphere", "no_reprojection_drift", "dt_refinement_uniqueness",
                           "identity_map_stationary", "torus_hypersurface_crosscheck", "embedded_circle_codim2",
                           "concentration_probe"}) {
    CAPTURE(name);
    const ExperimentConfig c = load_config(std::string(HH_CONFIG_DIR) + "/" + name + ".cfg");
    CHECK(c.name == name);
    const Manifold N = build_manifold(c);
    const GridFunction u0 = build_initial_datum(c, N, build_grid(c.M));
    CHECK(u0.size() == c.M);
    CHECK(u0.components() == N.ambient_dim());
    require_compatible(N, c.formulation);
  }
}

TEST_CASE("setting values revalidates") {
  ExperimentConfig c = parse_config(kSmall);
  set_config_value(c, "solver.t_end", "0.5");
  CHECK(c.t_end == 0.5);
  CHECK_THROWS_AS(set_config_value(c, "grid.M", "31"), Error);
  CHECK_THROWS_AS(set_config_value(c, "nope", "1"), Error);
}

TEST_CASE("number formatting is round-trip exact") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1e-3) == "0.001");
  CHECK(format_fixed17(0.1) == "0.10000000000000001");
  for (double v : {M_PI, -2.5e-17, 123456.789, 1.0 / 3.0}) {
    CHECK(std::stod(format_fixed17(v)) == v);
    CHECK(std::stod(format_number(v)) == v);
  }
}

TEST_CASE("output directory precedence") {
  {
    EnvGuard env(nullptr);
    CHECK(resolve_output_dir("", "", "out/x") == "out/x");
    CHECK(resolve_output_dir("", "cfgdir", "out/x") == "cfgdir");
  }
  {
    EnvGuard env("envdir");
    CHECK(resolve_output_dir("", "cfgdir", "out/x") == "envdir");
    CHECK(resolve_output_dir("explicit", "cfgdir", "out/x") == "explicit");
  }
}

TEST_CASE("atomic writes") {
  const fs::path d = fresh_dir("atomic");
  write_file_atomic((d / "a" / "b" / "f.txt").string(), "one");
  write_file_atomic((d / "a" / "b" / "f.txt").string(), "two");
  CHECK(slurp(d / "a" / "b" / "f.txt") == "two");
  CHECK_FALSE(fs::exists(d / "a" / "b" / "f.txt.tmp"));
}

TEST_CASE("evolve writes trajectory, manifest and snapshots") {
  EnvGuard env(nullptr);
  const fs::path d = fresh_dir("evolve");
  const ExperimentConfig c = parse_config(kSmall, "tiny");
  const EvolveSummary s = run_evolve(c, d.string());
  CHECK(s.output_dir == d.string());
  CHECK(s.records == 6);  // t = 0 and every second step of ten
  CHECK(s.final_time == doctest::Approx(0.01));

  const auto lines = split_lines(slurp(d / "trajectory.csv"));
  REQUIRE(lines.size() == 1 + s.records);
  CHECK(lines[0] ==
        "t,energy,constraint_violation,harmonic_residual,eps_R_0.5,eps_R_0.1,sup_variation,mean_0,mean_1,mean_2");
  // Every value is printed with 17 significant digits and round-trips.
  std::istringstream row(lines[1]);
  std::string cell;
  std::size_t cells = 0;
  while (std::getline(row, cell, ',')) {
    ++cells;
    const double v = std::stod(cell);
    CHECK(format_fixed17(v) == cell);
  }
  CHECK(cells == 10);

  const auto m = nlohmann::json::parse(slurp(d / "manifest.json"));
  CHECK(m["name"] == "tiny");
  CHECK(m["status"] == "ok");
  CHECK(m["code_version"] == std::string(code_version()));
  CHECK(m["config"]["grid.M"] == "32");
  CHECK(m["config"]["solver.scheme"] == "imex_euler");
  CHECK(m["config_as_read"]["initial.seed"] == "3");
  CHECK(m["calibration"]["C_disc"].get<double>() == calibrate_constant(0.5, 32));
  CHECK(m["calibration"]["C_dual"].get<double>() == duality_constant(0.5, 32));
  CHECK(m["calibration"]["source"].get<std::string>().rfind("on-the-fly", 0) == 0);
  CHECK(m["wall_time_seconds"].get<double>() >= 0.0);
  CHECK(m["trajectory"]["columns"].size() == 10);
  REQUIRE(m["snapshots"].size() == 2);

  const auto snap = split_lines(slurp(d / m["snapshots"][1]["file"].get<std::string>()));
  CHECK(m["snapshots"][1]["file"] == "snapshots/u_t0.005.csv");
  REQUIRE(snap.size() == 33);
  CHECK(snap[0] == "x,u_0,u_1,u_2");
  CHECK(fs::exists(d / "snapshots" / "u_t0.csv"));
}

TEST_CASE("reruns are bit-identical") {
  EnvGuard env(nullptr);
  const fs::path a = fresh_dir("det_a"), b = fresh_dir("det_b");
  const ExperimentConfig c = parse_config(kSmall, "tiny");
  run_evolve(c, a.string());
  run_evolve(c, b.string());
  CHECK(slurp(a / "trajectory.csv") == slurp(b / "trajectory.csv"));
  CHECK(slurp(a / "snapshots" / "u_t0.005.csv") == slurp(b / "snapshots" / "u_t0.005.csv"));
}

TEST_CASE("environment variable redirects output") {
  const fs::path d = fresh_dir("env");
  EnvGuard env(d.string().c_str());
  ExperimentConfig c = parse_config(kSmall, "tiny");
  c.output_dir = (fs::current_path() / "runner_out" / "not_used").string();
  fs::remove_all(c.output_dir);
  const EvolveSummary s = run_evolve(c);
  CHECK(s.output_dir == d.string());
  CHECK(fs::exists(d / "trajectory.csv"));
  CHECK_FALSE(fs::exists(c.output_dir));
}

TEST_CASE("failed runs leave partial output") {
  EnvGuard env(nullptr);
  const fs::path d = fresh_dir("failed");
  ExperimentConfig c = parse_config(kSmall, "tiny");
  set_config_value(c, "solver.constraint_abort_threshold", "1e-30");
  try {
    (void)run_evolve(c, d.string());
    FAIL("expected ConstraintBlowup");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ConstraintBlowup);
  }
  const auto m = nlohmann::json::parse(slurp(d / "manifest.json"));
  CHECK(m["status"] == "failed");
  CHECK(m["error"]["kind"] == to_string(ErrorKind::ConstraintBlowup));
  CHECK(split_lines(slurp(d / "trajectory.csv")).size() == 2);  // header and the initial record
}

TEST_CASE("calibration table") {
  EnvGuard env(nullptr);
  const fs::path d = fresh_dir("calibrate");
  const auto table = run_calibrate({0.5, 0.25}, {64, 128, 256, 512}, d.string());
  REQUIRE(table.size() == 8);
  for (std::size_t i = 1; i < 4; ++i) {
    CHECK(std::abs(table[i].c_disc - table[i - 1].c_disc) < 1e-2);
    CHECK(std::abs(table[i].c_dual - table[i - 1].c_dual) < 1e-2 * table[i].c_dual);
  }
  CHECK(table[2].s == 0.5);
  CHECK(table[2].M == 256);
  CHECK(table[2].c_disc == doctest::Approx((1.0 / M_PI) * (1.0 + 1.0 / 256)).epsilon(1e-3));

  const auto back = read_calibration_file((d / "calibration.json").string());
  REQUIRE(back.size() == table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    CHECK(back[i].s == table[i].s);
    CHECK(back[i].M == table[i].M);
    CHECK(back[i].c_disc == table[i].c_disc);
    CHECK(back[i].c_dual == table[i].c_dual);
  }

  // The (1/2, 256) entry reproduces the cos eigen-relation.
  const GridPtr g = build_grid(256);
  const GridFunction c = GridFunction::sample(g, [](double x) { return std::cos(x); });
  const GridFunction Lc = table[2].c_disc * singular_sum(c, 0.5);
  CHECK((Lc - c).l2_norm() / c.l2_norm() <= 1e-10);

  CHECK_THROWS_AS((void)read_calibration_file((d / "missing.json").string()), Error);
  write_file_atomic((d / "broken.json").string(), "{ not json");
  try {
    (void)read_calibration_file((d / "broken.json").string());
    FAIL("expected a config error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
  }
}

TEST_CASE("runs consume a calibration file and fall back without one") {
  EnvGuard env(nullptr);
  const fs::path d = fresh_dir("calibrated_run");
  // Grid size 40 is used nowhere else in this binary, so the installed
  // constants cannot leak into other cases.
  CalibrationEntry e;
  e.s = 0.5;
  e.M = 40;
  e.c_disc = 0.3215;
  e.c_dual = 6.25;
  write_file_atomic((d / "cal.json").string(), calibration_json({e}));

  ExperimentConfig c = parse_config(std::string(kSmall) + "calibration.file = " + (d / "cal.json").string() + "\n", "tiny");
  set_config_value(c, "grid.M", "40");
  const EvolveSummary s = run_evolve(c, (d / "run").string());
  CHECK(s.calibration_source == "file:" + (d / "cal.json").string());
  const auto m = nlohmann::json::parse(slurp(d / "run" / "manifest.json"));
  CHECK(m["calibration"]["C_disc"].get<double>() == 0.3215);
  CHECK(m["calibration"]["C_dual"].get<double>() == 6.25);
  CHECK(calibrate_constant(0.5, 40) == 0.3215);

  set_config_value(c, "calibration.file", (d / "absent.json").string());
  const EvolveSummary s2 = run_evolve(c, (d / "run2").string());
  CHECK(s2.calibration_source.find("not found") != std::string::npos);

  set_config_value(c, "calibration.file", (d / "cal.json").string());
  set_config_value(c, "grid.M", "32");
  const EvolveSummary s3 = run_evolve(c, (d / "run3").string());
  CHECK(s3.calibration_source.find("no entry") != std::string::npos);
}

TEST_CASE("check suites") {
  const CheckReport id = run_check("identity", 64, 1);
  CHECK(id.passed());
  CHECK(id.checks.size() >= 10);
  const auto j = nlohmann::json::parse(id.to_json());
  CHECK(j["suite"] == "identity");
  CHECK(j["passed"] == true);
  CHECK(j["checks"].size() == id.checks.size());
  CHECK_THROWS_AS((void)run_check("bogus", 64, 1), Error);
  CHECK_THROWS_AS((void)run_check("identity", 63, 1), Error);
  const CheckReport bad = run_check("crossform", 8, 7);
  CHECK_FALSE(bad.passed());
}
