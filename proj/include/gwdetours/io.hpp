#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gwdetours/measures.hpp"

namespace gwd::io {

/// Shortest decimal text that round-trips a double ("%.17g").
std::string format_double(double value);

/// Reads a point cloud from CSV. One row per point. An optional header
/// `x0,...,x{d-1}[,w]` is recognised by its first field not being numeric;
/// a header whose last column is named `w` marks that column as weights.
/// Without a header every column is a coordinate and weights are uniform.
DiscreteMeasure read_points_csv(const std::filesystem::path& path);

/// Writes `x0,...,x{d-1},w` with a header line.
void write_points_csv(const std::filesystem::path& path, const DiscreteMeasure& mu);

/// Writes the plan's nonzero cells as `src_index,dst_index,mass`.
void write_coupling_csv(const std::filesystem::path& path, const Matrix& plan);

/// Writes a dense matrix, one row per line, no header.
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);

/// One integer per line; blank lines ignored.
std::vector<long long> read_index_list(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace gwd::io
