#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "ooskge/kg.hpp"
#include "oracles.hpp"
#include "temp.hpp"

// OOSKGE_BIN is injected by the build and points at the ooskge executable.

namespace {

namespace fs = std::filesystem;

int run(const std::string& args) {
  const std::string cmd = std::string(OOSKGE_BIN) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

int run_env(const std::string& env, const std::string& args) {
  const std::string cmd = env + " " + std::string(OOSKGE_BIN) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

// One dataset shared by every CLI case; built once on first use.
struct Workspace {
  TempDir tmp;
  std::string input;
  std::string ds;

  Workspace() {
    input = tmp.file("input.tsv").string();
    ds = tmp.file("ds").string();
    write_triples(oracles::random_graph(30, 2, 120, 7), input);
    REQUIRE(run("build-dataset --input " + input + " --out " + ds +
                " --oos-fraction 0.25 --seed 5") == 0);
  }
};

Workspace& ws() {
  static Workspace instance;
  return instance;
}

const std::string kSmall = " --dim 8 --epochs 3 --eval-every 2 --batch-size 64";

}  // namespace

TEST_CASE("usage errors exit with code 2") {
  CHECK(run("--help") == 0);
  CHECK(run("train --help") == 0);
  CHECK(run("") == 2);                       // a subcommand is required
  CHECK(run("train") == 2);                  // missing required options
  CHECK(run("frobnicate") == 2);             // unknown subcommand
  CHECK(run("train --split /nonexistent --out x") == 2);
  CHECK(run("train --split " + ws().ds + " --out x --bogus-flag 1") == 2);
  CHECK(run("evaluate --split " + ws().ds + " --out x --queries bogus") == 2);
  // runtime configuration error after successful parsing
  CHECK(run("train --split " + ws().ds + " --out " + ws().tmp.file("bad").string() +
            " --lr 0" + kSmall) == 2);
  // evaluate needs a checkpoint unless ranking by popularity
  CHECK(run("evaluate --split " + ws().ds + " --out " +
            ws().tmp.file("nock").string()) == 2);
}

TEST_CASE("the dataset directory carries split files and a manifest") {
  for (const char* name : {"train.txt", "valid.txt", "test.txt", "stats.txt", "manifest.txt"}) {
    CHECK(fs::exists(fs::path(ws().ds) / name));
  }
}

TEST_CASE("training is reproducible byte for byte") {
  const std::string run1 = ws().tmp.file("run1").string();
  const std::string run2 = ws().tmp.file("run2").string();
  REQUIRE(run("train --split " + ws().ds + " --out " + run1 + " --seed 1" + kSmall) == 0);
  REQUIRE(run("train --split " + ws().ds + " --out " + run2 + " --seed 1" + kSmall) == 0);

  for (const char* name : {"checkpoint.bin", "run_log.tsv", "manifest.txt"}) {
    CHECK(fs::exists(fs::path(run1) / name));
  }
  CHECK(read_file(fs::path(run1) / "checkpoint.bin") ==
        read_file(fs::path(run2) / "checkpoint.bin"));
  CHECK(read_file(fs::path(run1) / "run_log.tsv") ==
        read_file(fs::path(run2) / "run_log.tsv"));
}

TEST_CASE("evaluation picks the trained aggregator up from the manifest") {
  const std::string run_dir = ws().tmp.file("run_eavg").string();
  REQUIRE(run("train --split " + ws().ds + " --out " + run_dir +
              " --seed 2 --aggregator eavg" + kSmall) == 0);

  const std::string rep = ws().tmp.file("rep").string();
  REQUIRE(run("evaluate --split " + ws().ds + " --checkpoint " + run_dir +
              "/checkpoint.bin --out " + rep) == 0);
  for (const char* name : {"report.txt", "report.tsv", "bins.tsv", "manifest.txt"}) {
    CHECK(fs::exists(fs::path(rep) / name));
  }
  CHECK(read_file(fs::path(rep) / "manifest.txt").find("aggregator=eavg") != std::string::npos);

  // identical inputs, identical report
  const std::string rep2 = ws().tmp.file("rep2").string();
  REQUIRE(run("evaluate --split " + ws().ds + " --checkpoint " + run_dir +
              "/checkpoint.bin --out " + rep2) == 0);
  CHECK(read_file(fs::path(rep) / "report.tsv") == read_file(fs::path(rep2) / "report.tsv"));
}

TEST_CASE("baselines run without a trained model when they can") {
  CHECK(run("evaluate --split " + ws().ds + " --baseline popularity --seed 3 --out " +
            ws().tmp.file("pop").string()) == 0);

  const std::string run_dir = ws().tmp.file("run_oov").string();
  REQUIRE(run("train --split " + ws().ds + " --out " + run_dir + " --seed 4" + kSmall) == 0);
  CHECK(run("evaluate --split " + ws().ds + " --baseline oov --checkpoint " + run_dir +
            "/checkpoint.bin --out " + ws().tmp.file("oov").string()) == 0);
}

TEST_CASE("dataset tampering is caught by checksums, then by the vocabulary") {
  TempDir local;
  const std::string ds = local.file("ds").string();
  const std::string input = local.file("input.tsv").string();
  write_triples(oracles::random_graph(30, 2, 120, 7), input);
  REQUIRE(run("build-dataset --input " + input + " --out " + ds +
              " --oos-fraction 0.25 --seed 5") == 0);
  const std::string run_dir = local.file("run").string();
  REQUIRE(run("train --split " + ds + " --out " + run_dir + " --seed 1" + kSmall) == 0);

  // grow the train graph behind the checkpoint's back
  std::string train_txt = read_file(fs::path(ds) / "train.txt");
  train_txt += "intruder\tr0\te1\n";
  write_file(fs::path(ds) / "train.txt", train_txt);

  const std::string args = "evaluate --split " + ds + " --checkpoint " + run_dir +
                           "/checkpoint.bin --out " + local.file("rep").string();
  CHECK(run(args) == 1);              // checksum mismatch
  CHECK(run(args + " --force") == 1); // vocabulary no longer matches
}

TEST_CASE("the seed environment variable reaches the run manifest") {
  const std::string run_dir = ws().tmp.file("run_env").string();
  REQUIRE(run_env("OOSKGE_SEED=42",
                  "train --split " + ws().ds + " --out " + run_dir + kSmall) == 0);
  CHECK(read_file(fs::path(run_dir) / "manifest.txt").find("seed=42") != std::string::npos);
}

TEST_CASE("config files supply defaults that flags override") {
  const std::string cfg = ws().tmp.file("cfg.ini").string();
  write_file(cfg, "dim=8\nepochs=2\nbatch-size=64\neval-every=2\n");

  const std::string run_a = ws().tmp.file("run_cfg_a").string();
  REQUIRE(run("train --split " + ws().ds + " --out " + run_a + " --config " + cfg) == 0);
  // header plus one row per epoch
  CHECK(count_lines(read_file(fs::path(run_a) / "run_log.tsv")) == 3);

  const std::string run_b = ws().tmp.file("run_cfg_b").string();
  REQUIRE(run("train --split " + ws().ds + " --out " + run_b + " --config " + cfg +
              " --epochs 1") == 0);
  CHECK(count_lines(read_file(fs::path(run_b) / "run_log.tsv")) == 2);
}

TEST_CASE("a psi sweep writes one run per value and a sorted summary") {
  const std::string out = ws().tmp.file("sweep").string();
  REQUIRE(run("sweep-psi --split " + ws().ds + " --out " + out +
              " --psi-list 0.5,0" + kSmall) == 0);

  CHECK(fs::exists(fs::path(out) / "psi_0" / "checkpoint.bin"));
  CHECK(fs::exists(fs::path(out) / "psi_0.5" / "report.tsv"));

  const std::string tsv = read_file(fs::path(out) / "psi_sweep.tsv");
  CHECK(tsv.rfind("psi\tmrr\n0\t", 0) == 0);  // header, then psi 0 first
  CHECK(tsv.find("\n0.5\t") != std::string::npos);
}
