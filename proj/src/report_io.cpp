#include "spectre/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "spectre/errors.hpp"

namespace spectre {
namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

std::string format_curve_csv(const Curve& curve) {
  std::string out = "sweep,metric,ci_low,ci_high,n_trials";
  if (curve.has_theory) out += ",theory";
  out += '\n';
  for (const auto& p : curve.points) {
    out += num(p.sweep) + ',' + num(p.metric) + ',' + num(p.ci_low) + ',' + num(p.ci_high) + ',' +
           std::to_string(p.n_trials);
    if (curve.has_theory) out += ',' + (p.theory ? num(*p.theory) : std::string("nan"));
    out += '\n';
  }
  return out;
}

std::vector<std::string> write_report(const ExperimentReport& report, const std::string& dir,
                                      bool partial) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) throw InputError("output path '" + dir + "' is not a writable directory");
  std::vector<std::string> paths;
  for (const auto& c : report.curves) {
    std::string path = (fs::path(dir) / (report.experiment + "_" + c.name + ".csv")).string();
    if (partial) path += ".partial";
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot open '" + path + "' for writing");
    f << format_curve_csv(c);
    if (!f) throw std::runtime_error("write to '" + path + "' failed");
    paths.push_back(path);
  }
  return paths;
}

}  // namespace spectre
