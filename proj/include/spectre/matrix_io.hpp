#pragma once

#include <string>

#include "spectre/inference.hpp"

namespace spectre {

/// Text format: one matrix row per line, comma-separated complex entries
/// `a+bi` / `a-bi` (a real-only `a` or imaginary-only `bi` is accepted).
/// Ragged rows, bad tokens and empty input throw InputError naming the
/// offending row and column (1-based).
CMatrix parse_matrix(const std::string& text);
CMatrix read_matrix(const std::string& path);

/// Writes entries with 17 significant digits, so a read-back is exact.
std::string format_matrix(const CMatrix& M);
void write_matrix(const CMatrix& M, const std::string& path);

}  // namespace spectre
