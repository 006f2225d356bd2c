#include <algorithm>
#include <string>
#include <vector>

#include "doctest.h"
#include "ooskge/errors.hpp"
#include "ooskge/kg.hpp"
#include "oracles.hpp"
#include "temp.hpp"

using namespace ooskge;

TEST_CASE("vocabulary interns labels in first-appearance order") {
  Vocabulary v;
  CHECK(v.intern("b") == 0);
  CHECK(v.intern("a") == 1);
  CHECK(v.intern("b") == 0);
  CHECK(v.size() == 2);
  CHECK(v.label(1) == "a");
  CHECK(v.find("a").value() == 1);
  CHECK(!v.find("c").has_value());
  CHECK_THROWS_AS((void)v.label(2), Error);
}

TEST_CASE("loading a two-line file yields the expected counts") {
  TempDir tmp;
  write_file(tmp.file("g.tsv"), "a\tr\tb\nb\tr\tc\n");
  const KnowledgeGraph g = load_triples(tmp.file("g.tsv"));
  CHECK(g.entities().size() == 3);
  CHECK(g.relations().size() == 1);
  CHECK(g.num_triples() == 2);
  CHECK(g.triple(0) == Triple{0, 0, 1});
  CHECK(g.triple(1) == Triple{1, 0, 2});
}

TEST_CASE("empty file loads as an empty graph") {
  TempDir tmp;
  write_file(tmp.file("empty.tsv"), "");
  const KnowledgeGraph g = load_triples(tmp.file("empty.tsv"));
  CHECK(g.num_triples() == 0);
  CHECK(g.entities().size() == 0);
  CHECK(g.relations().size() == 0);
}

TEST_CASE("malformed lines report their line number") {
  TempDir tmp;
  write_file(tmp.file("bad.tsv"), "a\tr\tb\na\tb\n");
  try {
    load_triples(tmp.file("bad.tsv"));
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }

  write_file(tmp.file("wide.tsv"), "a\tr\tb\tc\n");
  CHECK_THROWS_AS(load_triples(tmp.file("wide.tsv")), ParseError);
}

TEST_CASE("duplicate triples are rejected") {
  KnowledgeGraph g;
  g.add_triple("a", "r", "b");
  CHECK_THROWS_AS(g.add_triple("a", "r", "b"), ValidationError);

  TempDir tmp;
  write_file(tmp.file("dup.tsv"), "a\tr\tb\na\tr\tb\n");
  CHECK_THROWS_AS(load_triples(tmp.file("dup.tsv")), ValidationError);
}

TEST_CASE("strict vocabulary policy rejects unknown labels") {
  KnowledgeGraph base;
  base.add_triple("a", "r", "b");

  TempDir tmp;
  write_file(tmp.file("known.tsv"), "b\tr\ta\n");
  write_file(tmp.file("unknown.tsv"), "a\tr\tnew\n");

  const KnowledgeGraph ok = load_triples(tmp.file("known.tsv"), base, VocabPolicy::kStrict);
  CHECK(ok.num_triples() == 1);
  CHECK(ok.entities().size() == 2);  // vocabulary copied from base, not extended

  CHECK_THROWS_AS(load_triples(tmp.file("unknown.tsv"), base, VocabPolicy::kStrict),
                  UnknownSymbolError);
  const KnowledgeGraph extended =
      load_triples(tmp.file("unknown.tsv"), base, VocabPolicy::kExtend);
  CHECK(extended.entities().size() == 3);
}

TEST_CASE("append_triples merges files with cross-file duplicate detection") {
  TempDir tmp;
  write_file(tmp.file("one.tsv"), "a\tr\tb\n");
  write_file(tmp.file("two.tsv"), "b\tr\tc\n");
  write_file(tmp.file("dup.tsv"), "a\tr\tb\n");

  KnowledgeGraph g;
  append_triples(g, tmp.file("one.tsv"));
  append_triples(g, tmp.file("two.tsv"));
  CHECK(g.num_triples() == 2);
  CHECK_THROWS_AS(append_triples(g, tmp.file("dup.tsv")), ValidationError);
}

TEST_CASE("adjacency holds one outgoing and one incoming entry per triple") {
  const KnowledgeGraph g = oracles::random_graph(12, 3, 40, 5);
  std::vector<int> outgoing(g.num_triples(), 0);
  std::vector<int> incoming(g.num_triples(), 0);
  for (std::uint32_t v = 0; v < g.entities().size(); ++v) {
    for (const AdjEntry& e : g.adjacency(v)) {
      const Triple& t = g.triple(e.triple_index);
      if (e.dir == Direction::kOutgoing) {
        ++outgoing[e.triple_index];
        CHECK(t.head == v);
        CHECK(t.tail == e.other);
      } else {
        ++incoming[e.triple_index];
        CHECK(t.tail == v);
        CHECK(t.head == e.other);
      }
      CHECK(t.rel == e.rel);
    }
  }
  for (std::size_t i = 0; i < g.num_triples(); ++i) {
    CHECK(outgoing[i] == 1);
    CHECK(incoming[i] == 1);
  }
}

TEST_CASE("neighborhood length equals out-degree plus in-degree") {
  const KnowledgeGraph g = oracles::random_graph(10, 2, 30, 11);
  for (std::uint32_t v = 0; v < g.entities().size(); ++v) {
    std::size_t expected = 0;
    for (const Triple& t : g.triples()) {
      if (t.head == v) ++expected;
      if (t.tail == v) ++expected;
    }
    CHECK(g.neighborhood(v).size() == expected);
  }
}

TEST_CASE("self-loops contribute two adjacency entries") {
  KnowledgeGraph g;
  const std::uint32_t loop = g.add_triple("v", "r", "v");
  g.add_triple("v", "r", "u");
  CHECK(g.adjacency(0).size() == 3);

  // Excluding the self-loop triple removes both of its entries.
  const std::vector<AdjEntry> nbrs = g.neighborhood(0, loop);
  REQUIRE(nbrs.size() == 1);
  CHECK(nbrs[0].other == 1);
  CHECK(nbrs[0].dir == Direction::kOutgoing);
}

TEST_CASE("neighborhood excludes exactly the requested triple") {
  // g = {(a,r,b),(c,s,a)}: excluding (a,r,b) leaves only the incoming edge.
  KnowledgeGraph g;
  const std::uint32_t first = g.add_triple("a", "r", "b");
  g.add_triple("c", "s", "a");
  const std::vector<AdjEntry> nbrs = g.neighborhood(0, first);
  REQUIRE(nbrs.size() == 1);
  CHECK(nbrs[0].dir == Direction::kIncoming);
  CHECK(nbrs[0].rel == 1);
  CHECK(nbrs[0].other == 2);
}

TEST_CASE("find_triple locates stored triples only") {
  KnowledgeGraph g;
  g.add_triple("a", "r", "b");
  CHECK(g.find_triple(Triple{0, 0, 1}).value() == 0);
  CHECK(!g.find_triple(Triple{1, 0, 0}).has_value());
  CHECK(g.contains(Triple{0, 0, 1}));
}

TEST_CASE("write then load round-trips the file bytes") {
  TempDir tmp;
  const std::string original = "a\tr\tb\nb\tr\tc\nc\ts\ta\n";
  write_file(tmp.file("in.tsv"), original);
  const KnowledgeGraph g = load_triples(tmp.file("in.tsv"));
  write_triples(g, tmp.file("out.tsv"));
  CHECK(read_file(tmp.file("out.tsv")) == original);
}
