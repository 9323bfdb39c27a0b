#include "spectre/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "spectre/errors.hpp"

namespace spectre {
namespace {

struct CommandName {
  Command cmd;
  const char* name;
};

constexpr CommandName kCommands[] = {
    {Command::edge, "edge"},
    {Command::detect, "detect"},
    {Command::powers, "powers"},
    {Command::music, "music"},
    {Command::fig_detection, "fig-detection"},
    {Command::fig_roc, "fig-roc"},
    {Command::fig_power, "fig-power"},
    {Command::fig_music_mse, "fig-music-mse"},
    {Command::fig_resolution, "fig-resolution"},
    {Command::fig_fluct, "fig-fluct"},
};

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "scenario.N",         "scenario.T",       "scenario.c",        "scenario.K",
      "scenario.thetas",    "scenario.snr_db",  "scenario.constellation",
      "scenario.spacing",   "noise.ar",         "noise.ma",          "noise.unit_variance",
      "noise.quad_points",  "detection.L",      "detection.epsilon", "detection.k",
      "sweep.values",       "scan.grid_step_deg", "scan.window",     "io.input",
      "io.output",          "run.seed",         "run.trials",
  };
  return keys;
}

// Short spellings accepted on the command line and at the top of a file.
std::string canonical_key(std::string key) {
  std::replace(key.begin(), key.end(), '-', '_');
  static const std::map<std::string, std::string> aliases = {
      {"c", "scenario.c"},         {"snr_db", "scenario.snr_db"}, {"seed", "run.seed"},
      {"trials", "run.trials"},    {"out", "io.output"},          {"output", "io.output"},
      {"input", "io.input"},       {"in", "io.input"},            {"grid_step_deg", "scan.grid_step_deg"},
      {"N", "scenario.N"},         {"T", "scenario.T"},           {"K", "scenario.K"},
      {"L", "detection.L"},        {"epsilon", "detection.epsilon"}, {"k", "detection.k"},
  };
  if (auto it = aliases.find(key); it != aliases.end()) return it->second;
  return key;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& raw, const char* want) {
  throw InputError("config: " + key + " = '" + raw + "' is not " + want);
}

double to_double(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v))
    bad_value(key, raw, "a finite number");
  return v;
}

long long to_integer(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) bad_value(key, raw, "an integer");
  return v;
}

std::uint64_t to_u64(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  errno = 0;
  char* end = nullptr;
  if (s.empty() || s[0] == '-') bad_value(key, raw, "an unsigned 64-bit integer");
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (end != s.c_str() + s.size() || errno == ERANGE) bad_value(key, raw, "an unsigned 64-bit integer");
  return v;
}

std::size_t to_count(const std::string& key, const std::string& raw, long long min) {
  const long long v = to_integer(key, raw);
  if (v < min) throw InputError("config: " + key + " must be >= " + std::to_string(min));
  return static_cast<std::size_t>(v);
}

bool to_bool(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  if (s == "true") return true;
  if (s == "false") return false;
  bad_value(key, raw, "true or false");
}

std::string to_string_value(const std::string& raw) {
  const std::string s = trim(raw);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

// "[a, b]" or "a, b" or a bare scalar; "[]" is empty.
std::vector<double> to_list(const std::string& key, const std::string& raw) {
  std::string s = trim(raw);
  if (!s.empty() && s.front() == '[') {
    if (s.back() != ']') bad_value(key, raw, "a list [a, b, ...]");
    s = trim(s.substr(1, s.size() - 2));
  }
  std::vector<double> out;
  if (s.empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, item));
  if (s.back() == ',') bad_value(key, raw, "a list without a trailing comma");
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string range_list(double lo, double hi, double step) {
  std::string s = "[";
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long i = 0; i <= n; ++i) {
    if (i) s += ", ";
    s += format_double(lo + static_cast<double>(i) * step);
  }
  return s + "]";
}

ConfigTable figure_defaults(Command cmd) {
  ConfigTable d;
  switch (cmd) {
    case Command::fig_detection:
      d["sweep.values"] = range_list(12, 30, 1);
      d["scenario.snr_db"] = "10";
      break;
    case Command::fig_roc:
      d["sweep.values"] = range_list(0.01, 2.0, 0.01);
      d["scenario.snr_db"] = "2";
      d["noise.ar"] = "[0.2]";
      break;
    case Command::fig_power:
      d["sweep.values"] = range_list(0, 12, 0.5);
      break;
    case Command::fig_music_mse:
      d["scenario.c"] = "0.2";
      d["sweep.values"] = range_list(0, 25, 1);
      break;
    case Command::fig_resolution:
      d["scenario.c"] = "0.2";
      d["scenario.K"] = "2";
      d["scenario.thetas"] = "[10, 12]";
      d["scenario.spacing"] = "0.5";
      d["scan.window"] = "[5, 17]";
      d["sweep.values"] = range_list(10, 25, 1);
      break;
    case Command::fig_fluct:
      d["scenario.N"] = "200";
      d["noise.ar"] = "[]";
      // p = 3 sqrt(c): well above the threshold sqrt(c) of white noise.
      d["scenario.snr_db"] = format_double(10.0 * std::log10(3.0 * std::sqrt(0.5)));
      break;
    default:
      break;
  }
  return d;
}

void check_known(const std::string& key, const char* where) {
  if (!known_keys().count(key)) throw InputError(std::string("config: unknown key '") + key + "' " + where);
}

}  // namespace

Command parse_command(const std::string& name) {
  for (const auto& c : kCommands)
    if (name == c.name) return c.cmd;
  std::string all;
  for (const auto& c : kCommands) all += std::string(all.empty() ? "" : ", ") + c.name;
  throw InputError("unknown command '" + name + "' (expected one of: " + all + ")");
}

std::string command_name(Command cmd) {
  for (const auto& c : kCommands)
    if (c.cmd == cmd) return c.name;
  return "?";
}

bool is_figure_command(Command cmd) {
  return cmd != Command::edge && cmd != Command::detect && cmd != Command::powers &&
         cmd != Command::music;
}

ConfigTable parse_config_text(const std::string& text) {
  ConfigTable table;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(strip_comment(line));
    if (s.empty()) continue;
    const std::string where = "config line " + std::to_string(lineno) + ": ";
    if (s.front() == '[') {
      if (s.back() != ']' || s.size() < 3) throw InputError(where + "malformed section header");
      section = trim(s.substr(1, s.size() - 2));
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw InputError(where + "expected 'key = value'");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) throw InputError(where + "empty key");
    if (value.empty()) throw InputError(where + "empty value for '" + key + "'");
    const std::string full = canonical_key(section.empty() ? key : section + "." + key);
    if (!known_keys().count(full)) throw InputError(where + "unknown key '" + full + "'");
    if (table.count(full)) throw InputError(where + "duplicate key '" + full + "'");
    table[full] = value;
  }
  return table;
}

ConfigTable read_config_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

RunConfig build_run_config(Command cmd, const ConfigTable& table,
                           const std::vector<std::pair<std::string, std::string>>& overrides) {
  ConfigTable v = figure_defaults(cmd);
  std::set<std::string> user;  // keys set by the file or the flags
  for (const auto& [k, val] : table) {
    const std::string key = canonical_key(k);
    check_known(key, "in config file");
    v[key] = val;
    user.insert(key);
  }
  for (const auto& [k, val] : overrides) {
    const std::string key = canonical_key(k);
    check_known(key, "on the command line");
    v[key] = val;
    user.insert(key);
  }
  auto has = [&](const char* k) { return v.count(k) > 0; };
  auto raw = [&](const char* k) { return v.at(k); };

  RunConfig rc;
  rc.command = cmd;
  Scenario& sc = rc.scenario;

  // Noise: `ar` lists recursion coefficients x_t = sum a_k x_{t-k} + ...
  std::vector<double> ar = has("noise.ar") ? to_list("noise.ar", raw("noise.ar")) : std::vector<double>{0.6};
  std::vector<double> ma = has("noise.ma") ? to_list("noise.ma", raw("noise.ma")) : std::vector<double>{};
  const bool unit = has("noise.unit_variance") ? to_bool("noise.unit_variance", raw("noise.unit_variance")) : true;
  const std::size_t quad =
      has("noise.quad_points") ? to_count("noise.quad_points", raw("noise.quad_points"), 2) : 2048;
  try {
    sc.noise = ArmaSpec::from_recursion(ma, ar, unit, quad);
  } catch (const InputError& e) {
    throw InputError(std::string("config: noise: ") + e.what());
  }

  if (has("scenario.c")) rc.c = to_double("scenario.c", raw("scenario.c"));
  if (!(rc.c > 0.0)) throw InputError("config: scenario.c must be > 0");
  sc.N = has("scenario.N") ? to_count("scenario.N", raw("scenario.N"), 1) : 20;
  if (user.count("scenario.T")) {
    sc.T = to_count("scenario.T", raw("scenario.T"), 1);
    const double cT = sc.c_T();
    if (user.count("scenario.c") && std::abs(cT - rc.c) > 1e-12 * rc.c)
      throw InputError("config: scenario.c = " + format_double(rc.c) + " contradicts N/T = " +
                       format_double(cT));
    rc.c = cT;
  } else {
    sc.T = static_cast<std::size_t>(std::max(1.0, std::round(static_cast<double>(sc.N) / rc.c)));
  }

  sc.K = has("scenario.K") ? static_cast<int>(to_integer("scenario.K", raw("scenario.K"))) : 1;
  if (sc.K < 0) throw InputError("config: scenario.K must be >= 0");
  sc.thetas_deg = has("scenario.thetas") ? to_list("scenario.thetas", raw("scenario.thetas"))
                                         : std::vector<double>(static_cast<std::size_t>(sc.K), 10.0);
  if (sc.thetas_deg.size() != static_cast<std::size_t>(sc.K))
    throw InputError("config: scenario.thetas has " + std::to_string(sc.thetas_deg.size()) +
                     " entries but K = " + std::to_string(sc.K));
  const std::vector<double> snr =
      has("scenario.snr_db") ? to_list("scenario.snr_db", raw("scenario.snr_db")) : std::vector<double>{10.0};
  if (snr.size() == 1) {
    sc.set_snr_db(snr[0]);
  } else if (snr.size() == static_cast<std::size_t>(sc.K)) {
    sc.amplitudes.clear();
    for (double s : snr) sc.amplitudes.push_back(amplitude_from_snr_db(s));
  } else {
    throw InputError("config: scenario.snr_db needs one value or K values");
  }
  if (has("scenario.constellation")) {
    const std::string s = to_string_value(raw("scenario.constellation"));
    if (s == "qpsk") sc.constellation = Constellation::qpsk;
    else if (s == "gaussian") sc.constellation = Constellation::gaussian;
    else bad_value("scenario.constellation", s, "qpsk or gaussian");
  }
  if (has("scenario.spacing")) sc.geometry.spacing = to_double("scenario.spacing", raw("scenario.spacing"));
  if (!(sc.geometry.spacing > 0.0)) throw InputError("config: scenario.spacing must be > 0");

  if (has("detection.L")) sc.detection.L = static_cast<int>(to_integer("detection.L", raw("detection.L")));
  if (has("detection.epsilon")) sc.detection.epsilon = to_double("detection.epsilon", raw("detection.epsilon"));
  if (sc.detection.L < 1) throw InputError("config: detection.L must be >= 1");
  if (!(sc.detection.epsilon > 0.0)) throw InputError("config: detection.epsilon must be > 0");
  if (sc.K > sc.detection.L)
    throw InputError("config: K = " + std::to_string(sc.K) + " exceeds the detection bound L = " +
                     std::to_string(sc.detection.L));
  if (has("detection.k")) {
    const long long k = to_integer("detection.k", raw("detection.k"));
    if (k < 1 || k > sc.detection.L) throw InputError("config: detection.k must lie in [1, L]");
    rc.forced_k = static_cast<int>(k);
  }

  if (has("sweep.values")) rc.sweep = to_list("sweep.values", raw("sweep.values"));
  if (has("scan.grid_step_deg")) rc.grid_step_deg = to_double("scan.grid_step_deg", raw("scan.grid_step_deg"));
  if (!(rc.grid_step_deg > 0.0)) throw InputError("config: scan.grid_step_deg must be > 0");
  if (has("scan.window")) {
    const auto w = to_list("scan.window", raw("scan.window"));
    if (w.size() != 2 || !(w[0] < w[1]) || w[0] < -90.0 || w[1] > 90.0)
      throw InputError("config: scan.window must be [lo, hi] with -90 <= lo < hi <= 90");
    rc.window_deg = {w[0], w[1]};
  }
  if (has("io.input")) rc.input = to_string_value(raw("io.input"));
  if (has("io.output")) rc.output = to_string_value(raw("io.output"));
  if (has("run.seed")) rc.seed = to_u64("run.seed", raw("run.seed"));
  if (has("run.trials")) rc.trials = to_count("run.trials", raw("run.trials"), 1);

  const bool needs_input = cmd == Command::detect || cmd == Command::powers || cmd == Command::music;
  if (needs_input && rc.input.empty()) throw InputError(command_name(cmd) + " requires io.input (--input)");
  if (is_figure_command(cmd)) {
    if (rc.sweep.empty() && cmd != Command::fig_fluct)
      throw InputError("config: sweep.values is empty");
    if (cmd == Command::fig_detection)
      for (double n : rc.sweep)
        if (!(n >= 2.0) || n != std::floor(n))
          throw InputError("config: fig-detection sweep values are array sizes N (integers >= 2)");
    sc.validate();
  }
  return rc;
}

}  // namespace spectre
