#include "ooskge/kvfile.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "ooskge/errors.hpp"

namespace ooskge {

void KvFile::set(std::string_view key, std::string_view value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  entries_.emplace_back(key, value);
}

void KvFile::set_u64(std::string_view key, std::uint64_t value) {
  set(key, std::to_string(value));
}

void KvFile::set_double(std::string_view key, double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  set(key, buf);
}

std::optional<std::string> KvFile::get(std::string_view key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return v;
  return std::nullopt;
}

std::string KvFile::require(std::string_view key) const {
  auto v = get(key);
  if (!v) throw FormatError("missing key '" + std::string(key) + "'");
  return *v;
}

std::uint64_t KvFile::require_u64(std::string_view key) const {
  std::string v = require(key);
  char* end = nullptr;
  std::uint64_t x = std::strtoull(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    throw FormatError("key '" + std::string(key) + "' is not an integer: " + v);
  return x;
}

double KvFile::require_double(std::string_view key) const {
  std::string v = require(key);
  char* end = nullptr;
  double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw FormatError("key '" + std::string(key) + "' is not a number: " + v);
  return x;
}

void KvFile::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  for (const auto& [k, v] : entries_) out << k << '=' << v << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

KvFile KvFile::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path.string());
  KvFile kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("expected key=value at " + path.filename().string() + ":" +
                       std::to_string(line_no));
    kv.entries_.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return kv;
}

}  // namespace ooskge
