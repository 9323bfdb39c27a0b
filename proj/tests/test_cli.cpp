#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "spectre/commands.hpp"
#include "spectre/config.hpp"
#include "spectre/errors.hpp"
#include "spectre/matrix_io.hpp"
#include "spectre/report_io.hpp"

using namespace spectre;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("spectre_test_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct Run {
  int status = -1;
  std::string out;
};

// Runs the CLI binary named by SPECTRE_CLI; stdout and stderr are merged.
Run run_cli(const std::string& args) {
  const char* exe = std::getenv("SPECTRE_CLI");
  REQUIRE_MESSAGE(exe != nullptr, "SPECTRE_CLI is not set");
  const std::string cmd = std::string("\"") + exe + "\" " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int st = pclose(pipe);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

}  // namespace

TEST_CASE("config text parsing") {
  const auto t = parse_config_text(
      "# comment\n"
      "[scenario]\n"
      "N = 30  # trailing\n"
      "thetas = [10, 20]\n"
      "constellation = \"gaussian\"\n"
      "[noise]\n"
      "ar = 0.3\n");
  CHECK(t.at("scenario.N") == "30");
  CHECK(t.at("scenario.thetas") == "[10, 20]");
  CHECK(t.at("scenario.constellation") == "\"gaussian\"");
  CHECK(t.at("noise.ar") == "0.3");
  ConfigTable g = t;
  g["scenario.thetas"] = "[10]";
  CHECK(build_run_config(Command::fig_power, g).scenario.constellation == Constellation::gaussian);
  CHECK_THROWS_AS(parse_config_text("[scenario]\nN = 1\nN = 2\n"), InputError);
  CHECK_THROWS_AS(parse_config_text("[scenario\nN = 1\n"), InputError);
  CHECK_THROWS_AS(parse_config_text("just words\n"), InputError);
}

TEST_CASE("run configuration") {
  ConfigTable t = parse_config_text("[scenario]\nN = 30\nT = 60\nK = 2\nthetas = [10, 20]\nsnr_db = [12, 8]\n");
  const RunConfig cfg = build_run_config(Command::fig_music_mse, t, {{"seed", "9"}, {"trials", "33"}});
  CHECK(cfg.scenario.N == 30);
  CHECK(cfg.scenario.T == 60);
  CHECK(cfg.scenario.K == 2);
  CHECK(cfg.seed == 9);
  CHECK(cfg.trials == 33);
  REQUIRE(cfg.scenario.amplitudes.size() == 2);
  CHECK(cfg.scenario.amplitudes[0] == doctest::Approx(std::pow(10.0, 0.6)));

  const RunConfig by_c = build_run_config(Command::edge, {}, {{"N", "50"}, {"c", "0.25"}});
  CHECK(by_c.scenario.T == 200);
  const RunConfig by_t = build_run_config(Command::edge, {}, {{"N", "50"}, {"T", "100"}});
  CHECK(by_t.c == doctest::Approx(0.5));

  CHECK_THROWS_AS(build_run_config(Command::edge, {}, {{"nonsense", "1"}}), InputError);
  CHECK_THROWS_AS(build_run_config(Command::edge, {}, {{"N", "50"}, {"T", "100"}, {"c", "0.3"}}), InputError);
  CHECK_THROWS_AS(build_run_config(Command::fig_power, {}, {{"K", "4"}, {"L", "3"}}), InputError);
  CHECK_THROWS_AS(build_run_config(Command::powers, {}, {{"input", "m.txt"}, {"k", "0"}}), InputError);
  CHECK_THROWS_AS(build_run_config(Command::edge, {}, {{"N", "ten"}}), InputError);
  CHECK_THROWS_AS(build_run_config(Command::edge, {}, {{"noise.ar", "[1.5]"}}), InputError);
  CHECK_THROWS_AS(build_run_config(Command::detect, {}, {}), InputError);
  CHECK_THROWS_AS(parse_command("fig-nothing"), InputError);
  CHECK(parse_command("fig-roc") == Command::fig_roc);
  CHECK(command_name(Command::fig_music_mse) == "fig-music-mse");
  CHECK(is_figure_command(Command::fig_fluct));
  CHECK_FALSE(is_figure_command(Command::music));
}

TEST_CASE("matrix text format") {
  const CMatrix I = parse_matrix("1,0,0\n0,1,0\n0,0,1\n");
  CHECK((I - CMatrix::Identity(3, 3)).norm() == 0.0);
  const CMatrix M = parse_matrix("1+2i, -0.5-1e-3i\n3i, 4\n");
  CHECK(M(0, 0) == std::complex<double>(1, 2));
  CHECK(M(0, 1) == std::complex<double>(-0.5, -1e-3));
  CHECK(M(1, 0) == std::complex<double>(0, 3));
  CHECK(M(1, 1) == std::complex<double>(4, 0));

  CMatrix R(3, 4);
  Rng r(1);
  for (Eigen::Index i = 0; i < R.size(); ++i) R(i) = complex_normal(r) * 1e3;
  const CMatrix back = parse_matrix(format_matrix(R));
  CHECK((back - R).norm() <= 1e-15 * R.norm());

  auto where = [](const std::string& text) {
    try {
      parse_matrix(text);
    } catch (const InputError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(where("1,2\n3\n").find("row 2") != std::string::npos);
  CHECK(where("1,2\n3,x\n").find("row 2, column 2") != std::string::npos);
  CHECK(where("1,nan\n").find("row 1, column 2") != std::string::npos);
  CHECK(where("1,\n").find("row 1, column 2") != std::string::npos);
  CHECK_FALSE(where("").empty());
  CHECK_THROWS_AS(read_matrix("/nonexistent/matrix.txt"), InputError);
}

TEST_CASE("curve CSV") {
  Curve c{"x", true, {}};
  c.points.push_back(CurvePoint{1.5, 0.25, 0.125, 0.375, 10, 0.2});
  c.points.push_back(CurvePoint{2.0, 1.0 / 3.0, 0.0, 1.0, 10, std::nullopt});
  CHECK(format_curve_csv(c) ==
        "sweep,metric,ci_low,ci_high,n_trials,theory\n"
        "1.5,0.25,0.125,0.375,10,0.2\n"
        "2,0.3333333333,0,1,10,nan\n");
  c.has_theory = false;
  CHECK(format_curve_csv(c).substr(0, 37) == "sweep,metric,ci_low,ci_high,n_trials\n");

  ExperimentReport rep;
  rep.experiment = "demo";
  rep.curves.push_back(c);
  const fs::path dir = scratch("report") / "nested";
  const auto paths = write_report(rep, dir.string());
  REQUIRE(paths.size() == 1);
  CHECK(fs::path(paths[0]).filename() == "demo_x.csv");
  CHECK(slurp(paths[0]) == format_curve_csv(c));
  const auto partial = write_report(rep, dir.string(), true);
  CHECK(fs::path(partial[0]).filename() == "demo_x.csv.partial");
}

TEST_CASE("in-process commands") {
  const fs::path dir = scratch("inproc");
  const fs::path m = dir / "y.txt";
  write_matrix(parse_matrix("3,0,0,0\n0,1,0,0\n0,0,1,0\n0,0,0,0.9\n"), m.string());
  std::ostringstream out, err;
  const RunConfig cfg = build_run_config(Command::detect, {}, {{"input", m.string()}, {"L", "2"}});
  CHECK(run_command(cfg, out, err) == kExitOk);
  CHECK(out.str().find("k_hat = 1") != std::string::npos);

  std::ostringstream o2, e2;
  const RunConfig missing = build_run_config(Command::powers, {}, {{"input", (dir / "none.txt").string()}});
  CHECK(run_command(missing, o2, e2) == kExitInput);
  CHECK_FALSE(e2.str().empty());
}

TEST_CASE("command-line tool") {
  const Run edge = run_cli("edge --noise.ar [] --c 0.25");
  CHECK(edge.status == 0);
  CHECK(edge.out.find("b = 2.25\n") != std::string::npos);
  CHECK(edge.out.find("m_b = -1.33333") != std::string::npos);
  CHECK(edge.out.find("p_lim = 0.5\n") != std::string::npos);

  CHECK(run_cli("edge --no-such-key 3").status == 2);
  CHECK(run_cli("not-a-command").status == 2);
  CHECK(run_cli("edge --c -1").status == 2);
  CHECK(run_cli("detect").status == 2);
  CHECK(run_cli("--help").status == 0);

  const fs::path dir = scratch("tool");
  std::ofstream(dir / "run.toml") << "[scenario]\nN = 16\nT = 40\n[run]\ntrials = 25\n";
  const std::string base = "fig-detection --config \"" + (dir / "run.toml").string() + "\" --sweep.values \"[12, 16]\" --out ";
  const Run a = run_cli(base + "\"" + (dir / "a").string() + "\" --seed 3");
  const Run b = run_cli(base + "\"" + (dir / "b").string() + "\" --seed=3");
  REQUIRE(a.status == 0);
  REQUIRE(b.status == 0);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir / "a")) {
    ++files;
    CHECK(slurp(e.path()) == slurp(dir / "b" / e.path().filename()));
    CHECK(e.path().extension() == ".csv");
  }
  CHECK(files == 9);
  const std::string cdr = slurp(dir / "a" / "detection_proposed_cdr.csv");
  CHECK(cdr.rfind("sweep,metric,ci_low,ci_high,n_trials\n12,", 0) == 0);
  CHECK(cdr.find(",25\n16,") != std::string::npos);
}
