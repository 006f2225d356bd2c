#include "ooskge/manifest.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <string>

#include "ooskge/errors.hpp"

namespace ooskge {

namespace {

constexpr std::array<const char*, 4> kDatasetFiles = {"train.txt", "valid.txt", "test.txt",
                                                      "stats.txt"};

std::string hex_u64(std::uint64_t x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

}  // namespace

std::uint64_t fnv1a_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::uint64_t h = 14695981039346656037ull;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
  }
  return h;
}

void record_dataset_checksums(KvFile& manifest, const std::filesystem::path& split_dir) {
  for (const char* name : kDatasetFiles) {
    manifest.set(std::string("checksum.") + name, hex_u64(fnv1a_file(split_dir / name)));
  }
}

void verify_dataset_checksums(const KvFile& manifest, const std::filesystem::path& split_dir) {
  for (const char* name : kDatasetFiles) {
    const std::string key = std::string("checksum.") + name;
    const auto recorded = manifest.get(key);
    if (!recorded.has_value()) {
      throw ValidationError("manifest is missing " + key);
    }
    const std::string current = hex_u64(fnv1a_file(split_dir / name));
    if (current != *recorded) {
      throw ValidationError("dataset file " + std::string(name) +
                            " changed since training (checksum " + current + " != recorded " +
                            *recorded + ")");
    }
  }
}

}  // namespace ooskge
