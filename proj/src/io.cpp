#include "gwdetours/io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace gwd::io {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  errno = 0;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && errno != ERANGE;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IOError, "cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

std::string format_double(double value) {
  if (value == 0.0) return "0";  // folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

DiscreteMeasure read_points_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IOError, "cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  bool has_weight_column = false;
  bool header_seen = false;
  std::size_t width = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    auto fields = split_fields(line);
    double probe = 0.0;
    if (!header_seen && rows.empty() && !parse_number(fields.front(), probe)) {
      header_seen = true;
      has_weight_column = fields.size() >= 2 && fields.back() == "w";
      width = fields.size();
      continue;
    }
    if (width == 0) width = fields.size();
    if (fields.size() != width) {
      throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) +
                                             ": expected " + std::to_string(width) + " fields");
    }
    std::vector<double> row(width);
    for (std::size_t c = 0; c < width; ++c) {
      if (!parse_number(fields[c], row[c])) {
        throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) +
                                               ": bad number '" + fields[c] + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::EmptySupport, path.string() + " has no points");
  const std::size_t d = has_weight_column ? width - 1 : width;
  if (d == 0) throw Error(ErrorCode::ParseError, path.string() + " has no coordinate columns");
  Matrix pts(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
  Vector w(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < d; ++c) pts(i, c) = rows[i][c];
    w(i) = has_weight_column ? rows[i][d] : 1.0 / static_cast<double>(rows.size());
  }
  return make_discrete_measure(std::move(pts), std::move(w));
}

void write_points_csv(const std::filesystem::path& path, const DiscreteMeasure& mu) {
  auto out = open_for_write(path);
  for (Eigen::Index c = 0; c < mu.dim(); ++c) out << 'x' << c << ',';
  out << "w\n";
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    for (Eigen::Index c = 0; c < mu.dim(); ++c) out << format_double(mu.points()(i, c)) << ',';
    out << format_double(mu.weights()(i)) << '\n';
  }
}

void write_coupling_csv(const std::filesystem::path& path, const Matrix& plan) {
  auto out = open_for_write(path);
  out << "src_index,dst_index,mass\n";
  for (Eigen::Index i = 0; i < plan.rows(); ++i) {
    for (Eigen::Index j = 0; j < plan.cols(); ++j) {
      if (plan(i, j) > 0.0) out << i << ',' << j << ',' << format_double(plan(i, j)) << '\n';
    }
  }
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  auto out = open_for_write(path);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

std::vector<long long> read_index_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IOError, "cannot open " + path.string());
  std::vector<long long> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    char* end = nullptr;
    const long long v = std::strtoll(line.c_str(), &end, 10);
    if (end != line.c_str() + line.size()) {
      throw Error(ErrorCode::ParseError,
                  path.string() + ":" + std::to_string(line_no) + ": expected an integer");
    }
    out.push_back(v);
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_for_write(path);
  out << text;
}

}  // namespace gwd::io
