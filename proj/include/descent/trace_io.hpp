#pragma once

#include "descent/trace.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

namespace descent {

/// Raised on malformed trace CSV input; carries the 1-based row number.
struct CsvError : std::runtime_error {
  std::int64_t row;
  CsvError(std::int64_t row_, const std::string& message)
      : std::runtime_error("row " + std::to_string(row_) + ": " + message), row(row_) {}
};

namespace detail {
// Decimal, 17 significant digits, locale-independent.
inline void append_double(std::string& out, double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  out.append(buf, res.ptr);
}

inline double parse_double(std::string_view s, std::int64_t row) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw CsvError(row, "not a number: '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}
}  // namespace detail

inline constexpr const char* kTraceCsvHeader = "k,f_value,gap,grad_norm,alpha,beta,dist_to_opt";

/// Trace CSV: fixed header, one row per record, 17-significant-digit decimal
/// fields, empty fields for absent optionals, LF line endings, no trailing
/// delimiter. Coordinate columns x_0..x_{n-1} are appended only on request.
inline void write_trace_csv(std::ostream& os, const Trace& trace, bool with_coords = false) {
  std::string out = kTraceCsvHeader;
  if (with_coords && !trace.records.empty())
    for (Eigen::Index i = 0; i < trace.records.front().x.size(); ++i)
      out += ",x_" + std::to_string(i);
  out += '\n';
  for (const TraceRecord& r : trace.records) {
    out += std::to_string(r.k);
    out += ',';
    detail::append_double(out, r.f_value);
    out += ',';
    if (r.gap) detail::append_double(out, *r.gap);
    out += ',';
    detail::append_double(out, r.grad_norm);
    out += ',';
    detail::append_double(out, r.alpha);
    out += ',';
    detail::append_double(out, r.beta);
    out += ',';
    if (r.dist_to_opt) detail::append_double(out, *r.dist_to_opt);
    if (with_coords)
      for (Eigen::Index i = 0; i < r.x.size(); ++i) {
        out += ',';
        detail::append_double(out, r.x[i]);
      }
    out += '\n';
  }
  os << out;
}

inline void write_trace_csv_file(const std::string& path, const Trace& trace,
                                 bool with_coords = false) {
  std::ofstream os(path, std::ios::binary);  // binary: keep LF endings everywhere
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_trace_csv(os, trace, with_coords);
  if (!os) throw std::runtime_error("write failed: " + path);
}

/// One (k, value) series extracted from a trace CSV column. Rows where the
/// column is empty are skipped.
inline std::vector<std::pair<std::int64_t, double>> read_trace_series(std::istream& is,
                                                                      const std::string& column) {
  std::string line;
  if (!std::getline(is, line)) throw CsvError(1, "empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = detail::split_csv(line);
  std::size_t k_col = header.size(), v_col = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "k") k_col = i;
    if (header[i] == column) v_col = i;
  }
  if (k_col == header.size()) throw CsvError(1, "header has no 'k' column");
  if (v_col == header.size()) throw CsvError(1, "header has no '" + column + "' column");

  std::vector<std::pair<std::int64_t, double>> out;
  std::int64_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = detail::split_csv(line);
    if (fields.size() != header.size())
      throw CsvError(row, "expected " + std::to_string(header.size()) + " fields, got " +
                              std::to_string(fields.size()));
    std::int64_t k = 0;
    auto res = std::from_chars(fields[k_col].data(), fields[k_col].data() + fields[k_col].size(), k);
    if (res.ec != std::errc() || res.ptr != fields[k_col].data() + fields[k_col].size())
      throw CsvError(row, "bad iteration index '" + std::string(fields[k_col]) + "'");
    if (fields[v_col].empty()) continue;
    out.emplace_back(k, detail::parse_double(fields[v_col], row));
  }
  return out;
}

inline std::vector<std::pair<std::int64_t, double>> read_trace_series_file(
    const std::string& path, const std::string& column) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  return read_trace_series(is, column);
}

}  // namespace descent
