#pragma once

#include <string>
#include <vector>

#include "spectre/montecarlo.hpp"

namespace spectre {

/// CSV text of one curve: header `sweep,metric,ci_low,ci_high,n_trials`
/// plus `theory` when the curve carries one; LF line endings.
std::string format_curve_csv(const Curve& curve);

/// Writes `<dir>/<experiment>_<curve>.csv` for every curve and returns the
/// paths. With `partial`, file names get a `.partial` suffix.
std::vector<std::string> write_report(const ExperimentReport& report, const std::string& dir,
                                      bool partial = false);

}  // namespace spectre
