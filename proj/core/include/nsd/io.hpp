#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "nsd/matrix.hpp"

namespace nsd::io {

/// Shortest exact decimal form that round-trips to the same double bits
/// (17 significant digits).
std::string format_double(double v);
double parse_double(const std::string& s);

/// Writes to "<path>.tmp" then renames, so readers never observe a partial
/// file and a crashed writer never corrupts an existing one.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);
std::string read_file(const std::filesystem::path& path);

/// Plain-text key=value manifests; '#' starts a comment line. Keys may be
/// dotted (e.g. gen.k). Rendered sorted by key.
using KvMap = std::map<std::string, std::string>;
KvMap parse_kv(const std::string& content);
std::string render_kv(const KvMap& kv);
KvMap load_kv_file(const std::filesystem::path& path);
void save_kv_file(const std::filesystem::path& path, const KvMap& kv);

/// Matrix as CSV, one row per line, no header.
std::string matrix_to_csv(const la::Matrix& m);
la::Matrix matrix_from_csv(const std::string& content);
void save_matrix_csv(const std::filesystem::path& path, const la::Matrix& m);
la::Matrix load_matrix_csv(const std::filesystem::path& path);

std::vector<std::string> split(const std::string& s, char sep);
std::string trim(const std::string& s);

}  // namespace nsd::io
