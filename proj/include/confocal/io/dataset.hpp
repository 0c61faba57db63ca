#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "confocal/errors.hpp"
#include "confocal/geometry.hpp"

namespace confocal::io {

struct DatasetOptions {
  std::vector<std::string> cols;  // empty selects every non-mass column
  std::optional<std::string> mass_col;
};

struct Dataset {
  std::vector<std::string> columns;
  Matrix values;
  std::optional<Vector> masses;
  std::string path;

  WeightedPointSet points() const { return masses ? WeightedPointSet(values, *masses) : WeightedPointSet(values); }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\"");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\"");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

inline double parse_cell(std::string_view cell, std::size_t row, const std::string& column) {
  double v = 0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(v))
    throw Error(ErrorCode::ParseError, "row " + std::to_string(row) + ", column '" + column + "': '" +
                                           std::string(cell) + "' is not a finite number");
  return v;
}

}  // namespace detail

inline Dataset parse_dataset_text(std::string_view text, const DatasetOptions& opt, std::string path = "<memory>") {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto pos = text.find('\n', start);
    const auto line = text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    lines.push_back(line);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  std::size_t header_at = 0;
  while (header_at < lines.size() && detail::trim(lines[header_at]).empty()) ++header_at;
  if (header_at == lines.size()) throw Error(ErrorCode::EmptyDataset, path + ": no header row");
  std::vector<std::string> header;
  for (auto h : detail::split(lines[header_at])) header.emplace_back(h);

  auto index_of = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw Error(ErrorCode::ParseError, path + ": no column named '" + name + "'");
  };
  std::optional<std::size_t> mass_idx;
  if (opt.mass_col) mass_idx = index_of(*opt.mass_col);
  std::vector<std::size_t> picked;
  std::vector<std::string> names;
  if (opt.cols.empty()) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (!mass_idx || i != *mass_idx) {
        picked.push_back(i);
        names.push_back(header[i]);
      }
  } else {
    for (const auto& c : opt.cols) {
      picked.push_back(index_of(c));
      names.push_back(c);
    }
  }

  std::vector<std::vector<double>> rows;
  std::vector<double> masses;
  for (std::size_t li = header_at + 1; li < lines.size(); ++li) {
    if (detail::trim(lines[li]).empty()) continue;
    const auto cells = detail::split(lines[li]);
    const std::size_t row = li + 1;
    if (cells.size() != header.size())
      throw Error(ErrorCode::ParseError, path + ": row " + std::to_string(row) + " has " +
                                             std::to_string(cells.size()) + " fields, expected " +
                                             std::to_string(header.size()));
    std::vector<double> r;
    for (std::size_t i : picked) r.push_back(detail::parse_cell(cells[i], row, header[i]));
    if (mass_idx) {
      const double m = detail::parse_cell(cells[*mass_idx], row, header[*mass_idx]);
      if (!(m > 0))
        throw Error(ErrorCode::ParseError, path + ": row " + std::to_string(row) + ", column '" +
                                               header[*mass_idx] + "': mass must be positive");
      masses.push_back(m);
    }
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw Error(ErrorCode::EmptyDataset, path + ": no data rows");

  Dataset ds{names, Matrix(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(picked.size())),
             std::nullopt, std::move(path)};
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < picked.size(); ++j)
      ds.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  if (mass_idx) ds.masses = Eigen::Map<const Vector>(masses.data(), static_cast<Eigen::Index>(masses.size()));
  return ds;
}

inline Dataset parse_dataset(const std::string& path, const DatasetOptions& opt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dataset_text(buf.str(), opt, path);
}

}  // namespace confocal::io
