#pragma once

#include <cstdint>
#include <filesystem>
#include <span>

#include "ooskge/kg.hpp"
#include "ooskge/numerics.hpp"

namespace ooskge {

// DistMult embedding tables bound to a training vocabulary. Rows are stored
// contiguously so aggregation scans stay cache-friendly. Scoring from many
// threads is safe; updates require a single writer.
struct EmbeddingModel {
  Vocabulary entities;
  Vocabulary relations;
  Mat ent;  // |V| x d
  Mat rel;  // |R| x d

  std::size_t dim() const { return ent.cols(); }

  std::span<const double> entity_row(EntityId v) const;
  std::span<double> entity_row(EntityId v);
  std::span<const double> relation_row(RelationId r) const;
  std::span<double> relation_row(RelationId r);
};

// Entries i.i.d. uniform on [-sqrt(6/d), sqrt(6/d)], deterministic given seed.
EmbeddingModel init_model(const Vocabulary& entities, const Vocabulary& relations, std::size_t d,
                          std::uint64_t seed);

// DistMult score: sum_i z_v[i] * z_r[i] * z_u[i]. Symmetric in v and u.
double score(std::span<const double> z_v, std::span<const double> z_r,
             std::span<const double> z_u);

// d(score)/dz_v = z_r (.) z_u, and cyclically for the other two arguments.
void score_gradients(std::span<const double> z_v, std::span<const double> z_r,
                     std::span<const double> z_u, std::span<double> g_v, std::span<double> g_r,
                     std::span<double> g_u);

// Checkpoint layout (bit-exact): magic "OOSKGE1\n"; little-endian u32 |V|,
// |R|, d; |V| entity labels then |R| relation labels, each a u32 byte length
// followed by UTF-8 bytes; Z_ent then Z_rel, row-major little-endian f32.
void save_checkpoint(const EmbeddingModel& m, const std::filesystem::path& path);
EmbeddingModel load_checkpoint(const std::filesystem::path& path);

}  // namespace ooskge
