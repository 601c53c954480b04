#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "lvar/stats.hpp"

namespace lvar {

// 6 significant digits, locale-independent, trailing-zero stable. Negative
// zero is normalized so repeated emission is byte-identical.
std::string format_number(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Minimal comma-separated format: no quoting, so cell values must not
// contain commas or newlines (ids and language names in this pipeline never
// do).
void write_csv(std::ostream& out, const CsvTable& table);
void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

// Similarity records from a CSV. Columns pair_id, length_ratio and
// shared_fraction are required; depth_range, len_a and len_b are optional.
// Every remaining column is treated as a metric similarity column unless
// `metrics` arrives non-empty, in which case exactly those columns are read
// (and `metrics` is returned as the detected list otherwise). An empty cell
// means "absent" and is allowed for depth_range and metric columns only.
std::vector<SimilarityRecord> records_from_csv(const CsvTable& table,
                                               std::vector<std::string>& metrics);

}  // namespace lvar
