#ifndef MSGD_IO_HPP
#define MSGD_IO_HPP

// Numeric CSV files: comma-separated, no header unless requested, one
// matrix row per line. Values are written in shortest round-trip form.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "msgd/error.hpp"
#include "msgd/linalg.hpp"
#include "msgd/problem.hpp"
#include "msgd/trace.hpp"

namespace msgd {

struct CsvTable {
  std::vector<std::vector<double>> rows;
  std::size_t cols = 0;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline double parse_cell(std::string_view cell, std::size_t line, std::size_t column, const std::string& source) {
  const std::string_view t = trim(cell);
  double v = 0.0;
  const char* begin = t.data();
  const char* end = t.data() + t.size();
  if (!t.empty() && *begin == '+') {
    ++begin;
  }
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (t.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ConfigError(source + ": line " + std::to_string(line) + ", column " + std::to_string(column) +
                      ": non-numeric cell '" + std::string(t) + "'");
  }
  return v;
}

}  // namespace detail

inline CsvTable parse_csv(std::istream& in, bool header, const std::string& source = "csv") {
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (header && line_no == 1) {
      continue;
    }
    if (detail::trim(line).empty()) {
      throw ConfigError(source + ": line " + std::to_string(line_no) + " is blank");
    }
    std::vector<double> row;
    std::size_t start = 0;
    std::size_t column = 1;
    while (true) {
      const auto comma = line.find(',', start);
      const std::string_view cell(line.data() + start, (comma == std::string::npos ? line.size() : comma) - start);
      row.push_back(detail::parse_cell(cell, line_no, column, source));
      if (comma == std::string::npos) {
        break;
      }
      start = comma + 1;
      ++column;
    }
    if (table.rows.empty()) {
      table.cols = row.size();
    } else if (row.size() != table.cols) {
      throw ConfigError(source + ": line " + std::to_string(line_no) + " has " + std::to_string(row.size()) +
                        " cells, expected " + std::to_string(table.cols));
    }
    table.rows.push_back(std::move(row));
  }
  if (table.rows.empty()) {
    throw ConfigError(source + ": no data rows");
  }
  return table;
}

inline CsvTable read_csv(const std::filesystem::path& path, bool header = false) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open " + path.string());
  }
  return parse_csv(in, header, path.string());
}

inline Matrix to_matrix(const CsvTable& t) {
  Matrix a(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(t.cols));
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    for (std::size_t j = 0; j < t.cols; ++j) {
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = t.rows[i][j];
    }
  }
  return a;
}

/// A vector file holds either one value per line or a single row.
inline Vector to_vector(const CsvTable& t, const std::string& source = "vector") {
  if (t.cols == 1) {
    Vector v(static_cast<Eigen::Index>(t.rows.size()));
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      v[static_cast<Eigen::Index>(i)] = t.rows[i][0];
    }
    return v;
  }
  if (t.rows.size() == 1) {
    return Eigen::Map<const Vector>(t.rows[0].data(), static_cast<Eigen::Index>(t.cols));
  }
  throw ConfigError(source + ": expected a single column or a single row");
}

/// Where the right-hand side comes from: a separate vector file, or a
/// column of the matrix file that is split off.
struct RhsSpec {
  std::optional<std::filesystem::path> path;
  std::optional<std::size_t> column;
};

/// Reads A and b and solves for x* and the residual. No scaling or
/// centering is applied.
inline Problem load_csv_problem(const std::filesystem::path& matrix_path, const RhsSpec& rhs, bool header = false) {
  if (rhs.path.has_value() == rhs.column.has_value()) {
    throw ConfigError("exactly one of an rhs file or an rhs column must be given");
  }
  const CsvTable table = read_csv(matrix_path, header);
  Matrix a;
  Vector b;
  if (rhs.column) {
    const std::size_t c = *rhs.column;
    if (c >= table.cols) {
      throw ConfigError(matrix_path.string() + ": rhs column " + std::to_string(c) + " out of range for " +
                        std::to_string(table.cols) + " columns");
    }
    if (table.cols < 2) {
      throw ConfigError(matrix_path.string() + ": splitting off the rhs column leaves no matrix columns");
    }
    const Matrix full = to_matrix(table);
    a.resize(full.rows(), full.cols() - 1);
    for (Eigen::Index j = 0, k = 0; j < full.cols(); ++j) {
      if (static_cast<std::size_t>(j) != c) {
        a.col(k++) = full.col(j);
      }
    }
    b = full.col(static_cast<Eigen::Index>(c));
  } else {
    a = to_matrix(table);
    b = to_vector(read_csv(*rhs.path, header), rhs.path->string());
    if (b.size() != a.rows()) {
      throw ConfigError(rhs.path->string() + ": rhs has " + std::to_string(b.size()) + " entries, matrix has " +
                        std::to_string(a.rows()) + " rows");
    }
  }
  return make_problem(std::move(a), std::move(b));
}

inline void write_matrix_csv(std::ostream& os, const Matrix& a) {
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (j > 0) {
        os << ',';
      }
      os << format_double(a(i, j));
    }
    os << '\n';
  }
}

inline void write_vector_csv(std::ostream& os, const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    os << format_double(v[i]) << '\n';
  }
}

template <class Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ConfigError("cannot write " + path.string());
  }
  writer(out);
  if (!out) {
    throw ConfigError("failed while writing " + path.string());
  }
}

inline void write_trace_csv(const std::filesystem::path& path, const AggregateTrace& trace) {
  write_file(path, [&](std::ostream& os) { write_csv(os, trace); });
}

}  // namespace msgd

#endif  // MSGD_IO_HPP
