#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ooskge {

// Ordered key=value text file, one pair per line. Used for split stats,
// run manifests, and config files.
class KvFile {
 public:
  void set(std::string_view key, std::string_view value);
  void set_u64(std::string_view key, std::uint64_t value);
  void set_double(std::string_view key, double value);  // round-trippable %.17g

  std::optional<std::string> get(std::string_view key) const;
  std::string require(std::string_view key) const;  // throws FormatError
  std::uint64_t require_u64(std::string_view key) const;
  double require_double(std::string_view key) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  void write(const std::filesystem::path& path) const;
  static KvFile read(const std::filesystem::path& path);

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace ooskge
