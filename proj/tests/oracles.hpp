#pragma once

// Independent reference implementations and synthetic data builders used to
// cross-check the library. Everything here is written from first principles
// rather than by calling the code under test.

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ooskge/kg.hpp"
#include "ooskge/numerics.hpp"
#include "ooskge/rng.hpp"

namespace oracles {

// Solves M x = y by Gaussian elimination with partial pivoting.
inline std::vector<double> solve_dense(std::vector<std::vector<double>> M,
                                       std::vector<double> y) {
  const std::size_t n = y.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(M[r][col]) > std::abs(M[pivot][col])) pivot = r;
    }
    if (M[pivot][col] == 0.0) throw std::runtime_error("singular system in oracle");
    std::swap(M[col], M[pivot]);
    std::swap(y[col], y[pivot]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = M[r][col] / M[col][col];
      for (std::size_t c = col; c < n; ++c) M[r][c] -= f * M[col][c];
      y[r] -= f * y[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = y[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= M[i][c] * x[c];
    x[i] = s / M[i][i];
  }
  return x;
}

// Minimizer of ||A z - b||^2 + lambda ||z||^2 via explicitly formed normal
// equations and elimination (no Cholesky, no shared code with ridge_solve).
inline std::vector<double> ridge_minimizer(const ooskge::Mat& A, const std::vector<double>& b,
                                           double lambda) {
  const std::size_t n = A.rows();
  const std::size_t d = A.cols();
  std::vector<std::vector<double>> M(d, std::vector<double>(d, 0.0));
  std::vector<double> y(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += A(k, i) * A(k, j);
      M[i][j] = s;
    }
    M[i][i] += lambda;
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += A(k, i) * b[k];
    y[i] = s;
  }
  return solve_dense(std::move(M), std::move(y));
}

// Central finite difference of f at x.
inline double central_diff(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Random KG with optional self-loops; duplicate draws are skipped.
inline ooskge::KnowledgeGraph random_graph(std::size_t num_entities, std::size_t num_relations,
                                           std::size_t num_triples, std::uint64_t seed,
                                           bool allow_self_loops = true) {
  ooskge::KnowledgeGraph g;
  for (std::size_t v = 0; v < num_entities; ++v) g.intern_entity("e" + std::to_string(v));
  for (std::size_t r = 0; r < num_relations; ++r) g.intern_relation("r" + std::to_string(r));
  ooskge::rng::Stream stream(seed);
  std::size_t added = 0;
  std::size_t attempts = 0;
  while (added < num_triples) {
    if (++attempts > 100 * num_triples) {
      throw std::runtime_error("random_graph: too many rejected draws");
    }
    const ooskge::Triple t{static_cast<ooskge::EntityId>(stream.next_below(num_entities)),
                           static_cast<ooskge::RelationId>(stream.next_below(num_relations)),
                           static_cast<ooskge::EntityId>(stream.next_below(num_entities))};
    if (!allow_self_loops && t.head == t.tail) continue;
    if (g.contains(t)) continue;
    g.add_triple(t);
    ++added;
  }
  return g;
}

// Block-structured KG over three relations. Entities fall into blocks; r1 and
// r2 connect each entity to the next and second-next block, so an entity's
// block is inferable from its neighborhood, while r0 links each entity to one
// random per-entity block — an attribute independent of the entity's own
// block, recoverable only from the entity's r0 edges themselves.
inline ooskge::KnowledgeGraph block_graph(std::size_t num_blocks, std::size_t block_size,
                                          std::size_t edges_per_relation,
                                          std::size_t attr_edges, std::uint64_t seed) {
  const std::size_t num_entities = num_blocks * block_size;
  ooskge::KnowledgeGraph g;
  for (std::size_t v = 0; v < num_entities; ++v) g.intern_entity("e" + std::to_string(v));
  g.intern_relation("r0");
  g.intern_relation("r1");
  g.intern_relation("r2");
  ooskge::rng::Stream stream(seed);
  const std::size_t block_shift[3] = {0, 1, 2};  // r0's entry is unused
  for (std::size_t v = 0; v < num_entities; ++v) {
    const std::size_t block = v / block_size;
    for (std::uint32_t r = 0; r < 3; ++r) {
      const bool is_attr = r == 0;
      const std::size_t count = is_attr ? attr_edges : edges_per_relation;
      const std::size_t target_block =
          is_attr ? stream.next_below(num_blocks) : (block + block_shift[r]) % num_blocks;
      for (std::size_t k = 0; k < count; ++k) {
        for (std::size_t tries = 0; tries < 50; ++tries) {
          const auto u = static_cast<ooskge::EntityId>(target_block * block_size +
                                                       stream.next_below(block_size));
          const ooskge::Triple t{static_cast<ooskge::EntityId>(v), r, u};
          if (u == v || g.contains(t)) continue;
          g.add_triple(t);
          break;
        }
      }
    }
  }
  return g;
}

}  // namespace oracles
