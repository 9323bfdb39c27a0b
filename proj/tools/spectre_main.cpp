#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "spectre/commands.hpp"
#include "spectre/config.hpp"
#include "spectre/errors.hpp"

namespace {

// Remaining arguments are `--section.key value` or `--section.key=value`.
std::vector<std::pair<std::string, std::string>> key_overrides(const std::vector<std::string>& args) {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.size() < 3 || a.compare(0, 2, "--") != 0)
      throw spectre::InputError("unexpected argument '" + a + "'");
    const std::string body = a.substr(2);
    if (const auto eq = body.find('='); eq != std::string::npos) {
      out.emplace_back(body.substr(0, eq), body.substr(eq + 1));
    } else {
      if (i + 1 >= args.size()) throw spectre::InputError("missing value for '" + a + "'");
      out.emplace_back(body, args[++i]);
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Eigen-inference on observations with unknown correlated noise"};
  app.allow_extras();
  std::string command, config_path, seed, trials, out_dir;
  app.add_option("command", command,
                 "edge | detect | powers | music | fig-detection | fig-roc | fig-power | "
                 "fig-music-mse | fig-resolution | fig-fluct")
      ->required();
  app.add_option("--config", config_path, "config file ([section] / key = value)");
  app.add_option("--seed", seed, "master seed (u64)");
  app.add_option("--trials", trials, "Monte Carlo trials per sweep point");
  app.add_option("--out", out_dir, "output directory for CSV files");
  app.footer(
      "Any config key can be overridden with --<section>.<key> <value>, e.g.\n"
      "  --noise.ar 0.6 --scenario.N 20 --c 0.5 --snr-db 10\n"
      "Exit codes: 0 success, 1 runtime failure, 2 configuration or input error.");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? spectre::kExitOk : spectre::kExitInput;
  }
  spectre::RunConfig cfg;
  try {
    const spectre::Command cmd = spectre::parse_command(command);
    const spectre::ConfigTable table =
        config_path.empty() ? spectre::ConfigTable{} : spectre::read_config_file(config_path);
    auto overrides = key_overrides(app.remaining());
    if (!seed.empty()) overrides.emplace_back("run.seed", seed);
    if (!trials.empty()) overrides.emplace_back("run.trials", trials);
    if (!out_dir.empty()) overrides.emplace_back("io.output", out_dir);
    cfg = spectre::build_run_config(cmd, table, overrides);
  } catch (const spectre::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return spectre::kExitInput;
  }
  return spectre::run_command(cfg, std::cout, std::cerr);
}
