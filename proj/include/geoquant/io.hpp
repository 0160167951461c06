#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "geoquant/core.hpp"

namespace geoquant {

/// Shortest exact decimal form of a double (17 significant digits round-trip
/// bit-exactly through strtod).
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Writes content to path atomically (temp file in the same directory, then
/// rename).
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  const fs::path tmp = dir / (path.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot open for writing: " + tmp.string());
    out << content;
    if (!out) throw Error(ErrorKind::IoError, "write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::IoError, "rename failed: " + path.string());
}

inline std::string cloud_to_csv(const PointCloud& cloud) {
  std::ostringstream out;
  for (Eigen::Index i = 0; i < cloud.n(); ++i) {
    for (Eigen::Index j = 0; j < cloud.d(); ++j) {
      if (j) out << ',';
      out << format_double(cloud.points()(i, j));
    }
    out << '\n';
  }
  return out.str();
}

inline void write_cloud_csv(const std::filesystem::path& path, const PointCloud& cloud) {
  write_file_atomic(path, cloud_to_csv(cloud));
}

/// Parses CSV point rows (one point per row). skip_header drops the first line.
inline PointCloud cloud_from_csv_text(const std::string& text, bool skip_header = false) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (first && skip_header) {
      first = false;
      continue;
    }
    first = false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      const char* begin = cell.c_str();
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      while (end && *end == ' ') ++end;
      if (end == begin || (end && *end != '\0'))
        throw Error(ErrorKind::ParseError,
                    "bad numeric cell '" + cell + "' on line " + std::to_string(lineno));
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw Error(ErrorKind::ParseError, "ragged row on line " + std::to_string(lineno));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorKind::ParseError, "no data rows");
  Matrix pts(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[i].size(); ++j)
      pts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return validate_cloud(pts);
}

inline PointCloud read_cloud_csv(const std::filesystem::path& path, bool skip_header = false) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::FileNotFound, "cannot open: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return cloud_from_csv_text(buf.str(), skip_header);
}

/// JSON array-of-arrays form, mirrored by the reader bit-exactly.
inline nlohmann::json cloud_to_json(const PointCloud& cloud) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < cloud.n(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < cloud.d(); ++j) row.push_back(cloud.points()(i, j));
    arr.push_back(std::move(row));
  }
  return arr;
}

inline PointCloud cloud_from_json(const nlohmann::json& arr) {
  if (!arr.is_array() || arr.empty() || !arr.front().is_array())
    throw Error(ErrorKind::ParseError, "expected a JSON array of arrays");
  const auto n = static_cast<Eigen::Index>(arr.size());
  const auto d = static_cast<Eigen::Index>(arr.front().size());
  Matrix pts(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = arr[static_cast<size_t>(i)];
    if (static_cast<Eigen::Index>(row.size()) != d)
      throw Error(ErrorKind::ParseError, "ragged JSON rows");
    for (Eigen::Index j = 0; j < d; ++j) pts(i, j) = row[static_cast<size_t>(j)].get<double>();
  }
  return validate_cloud(pts);
}

inline void write_cloud_json(const std::filesystem::path& path, const PointCloud& cloud) {
  write_file_atomic(path, cloud_to_json(cloud).dump());
}

inline PointCloud read_cloud_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::FileNotFound, "cannot open: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
  return cloud_from_json(j);
}

/// Reads a cloud by extension: .json as array-of-arrays, anything else as CSV.
inline PointCloud read_cloud(const std::filesystem::path& path, bool skip_header = false) {
  if (path.extension() == ".json") return read_cloud_json(path);
  return read_cloud_csv(path, skip_header);
}

/// One point per row, CSV.
inline std::string polyline_to_csv(const std::vector<Point>& pts) {
  std::ostringstream out;
  for (const auto& p : pts) {
    for (Eigen::Index j = 0; j < p.size(); ++j) {
      if (j) out << ',';
      out << format_double(p[j]);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace geoquant
