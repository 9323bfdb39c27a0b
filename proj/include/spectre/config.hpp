#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spectre/montecarlo.hpp"

namespace spectre {

enum class Command {
  edge,
  detect,
  powers,
  music,
  fig_detection,
  fig_roc,
  fig_power,
  fig_music_mse,
  fig_resolution,
  fig_fluct,
};

/// Throws InputError for an unknown name.
Command parse_command(const std::string& name);
std::string command_name(Command cmd);
bool is_figure_command(Command cmd);

/// Flat "section.key" -> raw value text, as read from a config file.
using ConfigTable = std::map<std::string, std::string>;

/// Parses `[section]` headers, `key = value` lines and `#` comments.
/// Values are kept as raw text; keys before any header are top level.
ConfigTable parse_config_text(const std::string& text);
ConfigTable read_config_file(const std::string& path);

struct RunConfig {
  Command command = Command::edge;
  Scenario scenario;
  /// Ratio used by `edge` and to derive T when only N is given.
  double c = 0.5;
  std::string input;
  std::string output = ".";
  std::uint64_t seed = 1;
  std::size_t trials = 10000;
  double grid_step_deg = 0.05;
  std::pair<double, double> window_deg{-90.0, 90.0};
  /// Sweep values; meaning depends on the command (N, epsilon or SNR in dB).
  std::vector<double> sweep;
  /// Forces k_hat in `powers` and `music` instead of detecting it.
  std::optional<int> forced_k;
};

/// Figure defaults for `cmd`, then `table`, then `overrides` (in order).
/// Unknown keys, malformed values and contradictions throw InputError.
RunConfig build_run_config(Command cmd, const ConfigTable& table,
                           const std::vector<std::pair<std::string, std::string>>& overrides = {});

}  // namespace spectre
