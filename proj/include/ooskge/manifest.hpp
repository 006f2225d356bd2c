#pragma once

#include <cstdint>
#include <filesystem>

#include "ooskge/kvfile.hpp"

namespace ooskge {

// FNV-1a over the raw bytes of a file.
std::uint64_t fnv1a_file(const std::filesystem::path& path);

// Records a checksum.<name> entry for every dataset file of a split
// directory (train.txt, valid.txt, test.txt, stats.txt).
void record_dataset_checksums(KvFile& manifest, const std::filesystem::path& split_dir);

// Compares the recorded checksums against the directory's current contents.
// Throws ValidationError on any mismatch or missing file.
void verify_dataset_checksums(const KvFile& manifest, const std::filesystem::path& split_dir);

}  // namespace ooskge
