#include "spectre/matrix_io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "spectre/errors.hpp"

namespace spectre {
namespace {

std::string strip(const std::string& s) {
  std::string out;
  for (char ch : s)
    if (ch != ' ' && ch != '\t' && ch != '\r') out.push_back(ch);
  return out;
}

bool parse_real(const std::string& s, double& v) {
  if (s.empty()) return false;
  errno = 0;
  char* end = nullptr;
  v = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && errno != ERANGE && std::isfinite(v);
}

bool parse_entry(const std::string& tok, std::complex<double>& z) {
  if (tok.empty()) return false;
  if (tok.back() != 'i') {
    double re;
    if (!parse_real(tok, re)) return false;
    z = {re, 0.0};
    return true;
  }
  const std::string body = tok.substr(0, tok.size() - 1);
  // The sign that starts the imaginary part: last +/- not opening the token
  // and not part of an exponent.
  std::size_t split = std::string::npos;
  for (std::size_t i = body.size(); i-- > 1;)
    if ((body[i] == '+' || body[i] == '-') && body[i - 1] != 'e' && body[i - 1] != 'E') {
      split = i;
      break;
    }
  double re = 0.0, im = 0.0;
  if (split == std::string::npos) {
    if (!parse_real(body, im)) return false;
  } else if (!parse_real(body.substr(0, split), re) || !parse_real(body.substr(split), im)) {
    return false;
  }
  z = {re, im};
  return true;
}

}  // namespace

CMatrix parse_matrix(const std::string& text) {
  std::vector<std::vector<std::complex<double>>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (strip(line).empty()) continue;
    std::vector<std::complex<double>> row;
    std::stringstream ls(line);
    std::string tok;
    std::size_t col = 0;
    while (std::getline(ls, tok, ',')) {
      ++col;
      std::complex<double> z;
      if (!parse_entry(strip(tok), z))
        throw InputError("matrix: row " + std::to_string(lineno) + ", column " + std::to_string(col) +
                         ": cannot parse '" + strip(tok) + "' as a finite complex number");
      row.push_back(z);
    }
    if (!line.empty() && strip(line).back() == ',')
      throw InputError("matrix: row " + std::to_string(lineno) + ", column " + std::to_string(col + 1) +
                       ": empty entry");
    if (!rows.empty() && row.size() != rows.front().size())
      throw InputError("matrix: row " + std::to_string(lineno) + " has " + std::to_string(row.size()) +
                       " columns, expected " + std::to_string(rows.front().size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError("matrix: input is empty");
  CMatrix M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return M;
}

CMatrix read_matrix(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open matrix file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_matrix(ss.str());
}

std::string format_matrix(const CMatrix& M) {
  std::string out;
  char buf[96];
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      const double im = M(i, j).imag();
      std::snprintf(buf, sizeof buf, "%s%.17g%c%.17gi", j ? "," : "", M(i, j).real(),
                    std::signbit(im) ? '-' : '+', std::abs(im));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

void write_matrix(const CMatrix& M, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open '" + path + "' for writing");
  f << format_matrix(M);
  if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace spectre
