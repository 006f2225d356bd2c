#include "ooskge/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "ooskge/rng.hpp"

namespace ooskge {

std::span<const double> EmbeddingModel::entity_row(EntityId v) const {
  if (v >= ent.rows()) throw Error("entity handle out of range: " + std::to_string(v));
  return ent.row(v);
}

std::span<double> EmbeddingModel::entity_row(EntityId v) {
  if (v >= ent.rows()) throw Error("entity handle out of range: " + std::to_string(v));
  return ent.row(v);
}

std::span<const double> EmbeddingModel::relation_row(RelationId r) const {
  if (r >= rel.rows()) throw Error("relation handle out of range: " + std::to_string(r));
  return rel.row(r);
}

std::span<double> EmbeddingModel::relation_row(RelationId r) {
  if (r >= rel.rows()) throw Error("relation handle out of range: " + std::to_string(r));
  return rel.row(r);
}

EmbeddingModel init_model(const Vocabulary& entities, const Vocabulary& relations, std::size_t d,
                          std::uint64_t seed) {
  if (d == 0) throw Error("init_model: dimension must be positive");
  EmbeddingModel m;
  m.entities = entities;
  m.relations = relations;
  m.ent = Mat(entities.size(), d);
  m.rel = Mat(relations.size(), d);
  const double bound = std::sqrt(6.0 / static_cast<double>(d));
  rng::Stream stream(rng::substream_seed(seed, "init"));
  for (double& x : m.ent.data()) x = stream.next_in(-bound, bound);
  for (double& x : m.rel.data()) x = stream.next_in(-bound, bound);
  return m;
}

double score(std::span<const double> z_v, std::span<const double> z_r,
             std::span<const double> z_u) {
  return triple_dot(z_v, z_r, z_u);
}

void score_gradients(std::span<const double> z_v, std::span<const double> z_r,
                     std::span<const double> z_u, std::span<double> g_v, std::span<double> g_r,
                     std::span<double> g_u) {
  hadamard_into(z_r, z_u, g_v);
  hadamard_into(z_v, z_u, g_r);
  hadamard_into(z_v, z_r, g_u);
}

namespace {

constexpr char kMagic[8] = {'O', 'O', 'S', 'K', 'G', 'E', '1', '\n'};

void put_u32(std::ostream& out, std::uint32_t x) {
  unsigned char b[4] = {static_cast<unsigned char>(x), static_cast<unsigned char>(x >> 8),
                        static_cast<unsigned char>(x >> 16), static_cast<unsigned char>(x >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw FormatError("checkpoint truncated");
  return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
         (std::uint32_t(b[3]) << 24);
}

void put_f32(std::ostream& out, float x) {
  put_u32(out, std::bit_cast<std::uint32_t>(x));
}

float get_f32(std::istream& in) { return std::bit_cast<float>(get_u32(in)); }

void put_labels(std::ostream& out, const Vocabulary& vocab) {
  for (const std::string& label : vocab.labels()) {
    put_u32(out, static_cast<std::uint32_t>(label.size()));
    out.write(label.data(), static_cast<std::streamsize>(label.size()));
  }
}

void get_labels(std::istream& in, Vocabulary& vocab, std::uint32_t count) {
  std::string buf;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::uint32_t len = get_u32(in);
    buf.resize(len);
    in.read(buf.data(), len);
    if (!in) throw FormatError("checkpoint truncated in label table");
    vocab.intern(buf);
  }
  if (vocab.size() != count) throw FormatError("checkpoint label table contains duplicates");
}

void put_rows_f32(std::ostream& out, const Mat& m) {
  for (double x : m.data()) put_f32(out, static_cast<float>(x));
}

void get_rows_f32(std::istream& in, Mat& m) {
  for (double& x : m.data()) x = static_cast<double>(get_f32(in));
}

}  // namespace

void save_checkpoint(const EmbeddingModel& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path.string());
  out.write(kMagic, sizeof(kMagic));
  put_u32(out, m.entities.size());
  put_u32(out, m.relations.size());
  put_u32(out, static_cast<std::uint32_t>(m.dim()));
  put_labels(out, m.entities);
  put_labels(out, m.relations);
  put_rows_f32(out, m.ent);
  put_rows_f32(out, m.rel);
  if (!out) throw IoError("checkpoint write failed: " + path.string());
}

EmbeddingModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw FormatError("not a checkpoint file: " + path.string());
  std::uint32_t num_entities = get_u32(in);
  std::uint32_t num_relations = get_u32(in);
  std::uint32_t d = get_u32(in);
  if (d == 0) throw FormatError("checkpoint has zero dimension");
  EmbeddingModel m;
  get_labels(in, m.entities, num_entities);
  get_labels(in, m.relations, num_relations);
  m.ent = Mat(num_entities, d);
  m.rel = Mat(num_relations, d);
  get_rows_f32(in, m.ent);
  get_rows_f32(in, m.rel);
  in.peek();
  if (!in.eof()) throw FormatError("trailing bytes in checkpoint: " + path.string());
  return m;
}

}  // namespace ooskge
