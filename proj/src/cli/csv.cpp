#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "srp/cli.hpp"
#include "srp/errors.hpp"

namespace srp::cli {

namespace {

std::vector<std::string_view> split(std::string_view line)
{
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string where(const std::string & source, std::size_t line)
{
  return source + ":" + std::to_string(line) + ": ";
}

double parse_cell(std::string_view cell, const std::string & source, std::size_t line, std::size_t column)
{
  while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
  while (!cell.empty() && cell.back() == ' ') cell.remove_suffix(1);
  double v        = 0.0;
  const auto * lo = cell.data();
  const auto * hi = cell.data() + cell.size();
  const auto res  = std::from_chars(lo, hi, v);
  if (cell.empty() || res.ec != std::errc() || res.ptr != hi) {
    throw InputError(where(source, line) + "column " + std::to_string(column) + " is not a number: '"
                     + std::string(cell) + "'");
  }
  if (!std::isfinite(v)) {
    throw InputError(where(source, line) + "column " + std::to_string(column) + " is not finite");
  }
  return v;
}

}  // namespace

CsvSamples read_csv(std::istream & in, const std::string & source)
{
  std::string text;
  std::size_t line_no = 0;
  int dim             = -1;
  std::vector<double> t;
  std::vector<Eigen::VectorXd> x;
  while (std::getline(in, text)) {
    ++line_no;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (dim < 0) {
      const auto head = split(text);
      if (head.size() < 2 || head[0] != "t") {
        throw InputError(where(source, line_no) + "header must be t,x1,...,xd");
      }
      for (std::size_t i = 1; i < head.size(); ++i) {
        if (head[i] != "x" + std::to_string(i)) {
          throw InputError(where(source, line_no) + "header column " + std::to_string(i + 1) + " must be x"
                           + std::to_string(i));
        }
      }
      dim = static_cast<int>(head.size()) - 1;
      continue;
    }
    if (text.empty()) continue;
    const auto cells = split(text);
    if (cells.size() != static_cast<std::size_t>(dim) + 1) {
      throw InputError(where(source, line_no) + "expected " + std::to_string(dim + 1) + " columns, got "
                       + std::to_string(cells.size()));
    }
    const double ti = parse_cell(cells[0], source, line_no, 1);
    if (!t.empty() && !(ti > t.back())) {
      throw InputError(where(source, line_no) + "t must be strictly increasing");
    }
    Eigen::VectorXd xi(dim);
    for (int k = 0; k < dim; ++k) xi[k] = parse_cell(cells[static_cast<std::size_t>(k) + 1], source, line_no, k + 2);
    t.push_back(ti);
    x.push_back(std::move(xi));
  }
  if (dim < 0) throw InputError(source + ": empty file");
  if (t.size() < 2) throw InputError(source + ": need at least two samples");
  const double t0   = t.front();
  const double span = t.back() - t0;
  for (auto & ti : t) ti = (ti - t0) / span;
  t.back() = 1.0;
  return {std::move(t), std::move(x)};
}

GridSamples resample(const CsvSamples & s, int depth)
{
  if (depth < 0 || depth > 20) throw InputError("resample: depth must lie in 0..20");
  const std::size_t n = std::size_t{1} << depth;
  GridSamples out;
  out.depth         = depth;
  out.source_points = s.t.size();
  out.values.reserve(n + 1);
  std::size_t k = 0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double u = static_cast<double>(i) * pow2(-depth);
    while (k + 2 < s.t.size() && s.t[k + 1] <= u) ++k;
    if (u == s.t[k]) {
      out.values.push_back(s.x[k]);
    } else if (u == s.t[k + 1]) {
      out.values.push_back(s.x[k + 1]);
    } else {
      const double frac = (u - s.t[k]) / (s.t[k + 1] - s.t[k]);
      out.values.push_back(s.x[k] + frac * (s.x[k + 1] - s.x[k]));
    }
  }
  for (std::size_t m = 0; m < s.t.size(); ++m) {
    const double pos    = s.t[m] * static_cast<double>(n);
    const auto cell     = std::min(static_cast<std::size_t>(pos), n - 1);
    const double frac   = pos - static_cast<double>(cell);
    const Eigen::VectorXd at = out.values[cell] + frac * (out.values[cell + 1] - out.values[cell]);
    out.max_displacement = std::max(out.max_displacement, (at - s.x[m]).norm());
  }
  return out;
}

GridSamples ingest_csv(const std::string & path, int depth)
{
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return resample(read_csv(in, path), depth);
}

void write_csv(std::ostream & out, const std::vector<Eigen::VectorXd> & grid)
{
  if (grid.size() < 2) throw InputError("write_csv: need at least two points");
  const int dim = static_cast<int>(grid.front().size());
  out << 't';
  for (int k = 1; k <= dim; ++k) out << ",x" << k;
  out << '\n';
  char buf[32];
  const double n = static_cast<double>(grid.size() - 1);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", static_cast<double>(i) / n);
    out << buf;
    for (int k = 0; k < dim; ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", grid[i][k]);
      out << ',' << buf;
    }
    out << '\n';
  }
}

}  // namespace srp::cli
