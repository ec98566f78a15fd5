#pragma once

#include <string>
#include <vector>

#include "vcgmm/types.hpp"

namespace vcgmm {

// CSV: one point per row, comma-separated numeric fields, optional single
// header row (auto-detected by a non-numeric first row). Ragged rows,
// non-numeric cells, NaN/Inf values and empty files raise DataError with
// row/column diagnostics.
DataMatrix load_csv(const std::string& path);

// Full-precision CSV writer (shortest round-trip formatting).
void write_csv(const DataMatrix& data, const std::string& path);

// Binary layout: 8-byte magic "VCGMM001", two 64-bit little-endian unsigned
// counts (N, D), then N*D 64-bit little-endian IEEE-754 values, row-major.
// Loads are bit-faithful; bad magic or truncation raise DataError naming the
// offending byte offset / expected size.
DataMatrix load_binary(const std::string& path);
void write_binary(const DataMatrix& data, const std::string& path);

// Detects by file extension: ".csv" -> CSV, anything else -> binary.
DataMatrix load_matrix(const std::string& path);

// Fitted model as JSON: {"dim", "clusters", "variance", "means"}.
void save_model(const GmmParams& params, const std::string& path);
GmmParams load_model(const std::string& path);

// One weight per line, used alongside a saved coreset point matrix.
void save_weights(const std::vector<double>& weights, const std::string& path);
std::vector<double> load_weights(const std::string& path);

}  // namespace vcgmm
