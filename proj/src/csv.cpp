#include "lvar/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <stdexcept>

namespace lvar {

std::string format_number(double v) {
  if (v == 0.0) v = 0.0;  // collapse -0
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v,
                           std::chars_format::general, 6);
  return std::string(buf, res.ptr);
}

void write_csv(std::ostream& out, const CsvTable& table) {
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i > 0) out << ',';
    out << table.header[i];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) {
      throw std::invalid_argument("csv row width does not match header");
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out << ',';
      out << row[i];
    }
    out << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  }
  write_csv(out, table);
  if (!out) {
    throw std::runtime_error("write failed for '" + path.string() + "'");
  }
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return cells;
}

}  // namespace

namespace {

double parse_double(const std::string& cell, const std::string& context) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw std::runtime_error("cannot parse number '" + cell + "' in " +
                             context);
  }
  return value;
}

}  // namespace

std::vector<SimilarityRecord> records_from_csv(const CsvTable& table,
                                               std::vector<std::string>& metrics) {
  auto column_index = [&table](const std::string& name) -> std::ptrdiff_t {
    for (std::size_t i = 0; i < table.header.size(); ++i) {
      if (table.header[i] == name) return static_cast<std::ptrdiff_t>(i);
    }
    return -1;
  };
  auto require_column = [&](const std::string& name) {
    auto idx = column_index(name);
    if (idx < 0) {
      throw std::runtime_error("records CSV is missing column '" + name + "'");
    }
    return static_cast<std::size_t>(idx);
  };

  const std::size_t id_col = require_column("pair_id");
  const std::size_t ratio_col = require_column("length_ratio");
  const std::size_t shared_col = require_column("shared_fraction");
  const std::ptrdiff_t depth_col = column_index("depth_range");
  const std::ptrdiff_t len_a_col = column_index("len_a");
  const std::ptrdiff_t len_b_col = column_index("len_b");

  static const std::vector<std::string> reserved{
      "pair_id", "length_ratio", "shared_fraction",
      "depth_range", "len_a", "len_b"};
  if (metrics.empty()) {
    for (const auto& name : table.header) {
      if (std::find(reserved.begin(), reserved.end(), name) == reserved.end()) {
        metrics.push_back(name);
      }
    }
    if (metrics.empty()) {
      throw std::runtime_error("records CSV has no metric columns");
    }
  }
  std::vector<std::size_t> metric_cols;
  for (const auto& name : metrics) {
    metric_cols.push_back(require_column(name));
  }

  std::vector<SimilarityRecord> records;
  records.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    SimilarityRecord rec;
    rec.pair_id = row[id_col];
    const std::string context = "record '" + rec.pair_id + "'";
    rec.length_ratio = parse_double(row[ratio_col], context);
    rec.shared_fraction = parse_double(row[shared_col], context);
    if (depth_col >= 0 && !row[static_cast<std::size_t>(depth_col)].empty()) {
      rec.depth_range =
          parse_double(row[static_cast<std::size_t>(depth_col)], context);
    }
    if (len_a_col >= 0 && len_b_col >= 0 &&
        !row[static_cast<std::size_t>(len_a_col)].empty() &&
        !row[static_cast<std::size_t>(len_b_col)].empty()) {
      rec.lengths = std::pair<std::int64_t, std::int64_t>{
          static_cast<std::int64_t>(parse_double(
              row[static_cast<std::size_t>(len_a_col)], context)),
          static_cast<std::int64_t>(parse_double(
              row[static_cast<std::size_t>(len_b_col)], context))};
      // Lengths are the ground truth; a 6-significant-digit ratio cell is
      // snapped back to min/max exactly, anything further off is an error.
      const double exact =
          static_cast<double>(std::min(rec.lengths->first, rec.lengths->second)) /
          static_cast<double>(std::max(rec.lengths->first, rec.lengths->second));
      if (std::abs(rec.length_ratio - exact) > 1e-5) {
        throw std::runtime_error(context +
                                 ": length_ratio cell disagrees with len_a/len_b");
      }
      rec.length_ratio = exact;
    }
    for (std::size_t j = 0; j < metrics.size(); ++j) {
      const std::string& cell = row[metric_cols[j]];
      if (cell.empty()) continue;
      rec.similarity[metrics[j]] = parse_double(cell, context);
    }
    validate(rec);
    records.push_back(std::move(rec));
  }
  return records;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open '" + path.string() + "'");
  }
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!have_header) {
      table.header = split_line(line);
      have_header = true;
      continue;
    }
    auto cells = split_line(line);
    if (cells.size() != table.header.size()) {
      throw std::runtime_error("'" + path.string() + "' row " +
                               std::to_string(table.rows.size() + 2) +
                               " has " + std::to_string(cells.size()) +
                               " cells, header has " +
                               std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  if (!have_header) {
    throw std::runtime_error("'" + path.string() + "' is empty");
  }
  return table;
}

}  // namespace lvar
