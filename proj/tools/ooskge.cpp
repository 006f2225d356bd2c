// Command-line front end: dataset construction, training, evaluation, and
// psi sweeps over one shared library. Exit codes: 0 success, 2 usage or
// configuration error, 1 runtime failure.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ooskge/aggregation.hpp"
#include "ooskge/errors.hpp"
#include "ooskge/evaluation.hpp"
#include "ooskge/kg.hpp"
#include "ooskge/kvfile.hpp"
#include "ooskge/manifest.hpp"
#include "ooskge/model.hpp"
#include "ooskge/splitgen.hpp"
#include "ooskge/training.hpp"

namespace {

using namespace ooskge;
namespace fs = std::filesystem;

std::string g17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string gshort(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", x);
  return buf;
}

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw IoError("failed writing " + path.string());
}

// ---- build-dataset ---------------------------------------------------------

struct BuildOpts {
  std::vector<std::string> inputs;
  std::string out;
  double fraction = 0.2;
  std::uint64_t seed = 0;
};

int run_build_dataset(const BuildOpts& o) {
  const auto start = std::chrono::steady_clock::now();
  KnowledgeGraph merged;
  for (const std::string& file : o.inputs) append_triples(merged, file);
  const OutOfSampleSplit split = build_split(merged, o.fraction, o.seed);
  write_split(split, o.out);

  KvFile manifest;
  manifest.set("command", "build-dataset");
  for (std::size_t i = 0; i < o.inputs.size(); ++i) {
    manifest.set("input." + std::to_string(i), o.inputs[i]);
  }
  manifest.set_double("oos_fraction", o.fraction);
  manifest.set_u64("seed", o.seed);
  record_dataset_checksums(manifest, o.out);
  manifest.set("seconds", gshort(elapsed_seconds(start)));
  manifest.write(fs::path(o.out) / "manifest.txt");

  const SplitStats st = split.stats();
  std::cout << "dataset written to " << o.out << ": " << st.in_sample_entities
            << " in-sample entities, " << st.oos_valid << "+" << st.oos_test
            << " out-of-sample, " << st.relations << " relations, " << st.train_triples
            << " train triples, " << st.valid_queries << "/" << st.test_queries
            << " valid/test queries\n";
  return 0;
}

// ---- shared training options ----------------------------------------------

struct TrainOpts {
  std::string split;
  std::string out;
  std::string config_path;
  double lr = 0.1;
  double lambda = 0.01;
  int neg_ratio = 1;
  double psi = 0.5;
  std::size_t dim = 200;
  std::size_t epochs = 1000;
  std::size_t batch_size = 1024;
  std::size_t eval_every = 100;
  std::uint64_t seed = 0;
  std::string aggregator = "eravg";
  double agg_lambda = 0.01;
  bool no_validate = false;

  CLI::Option* agg_lambda_opt = nullptr;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Applies key=value defaults from a file to options the command line (or the
// environment) left untouched. CLI11 only processes set_config on the app it
// was asked to parse, not on subcommands, so the file is handled explicitly.
void apply_config_file(CLI::App* cmd, const std::string& path) {
  if (path.empty()) return;
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string entry = trim(line);
    if (entry.empty() || entry[0] == '#') continue;
    const std::string where = path + ":" + std::to_string(lineno);
    const std::size_t eq = entry.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key=value");
    const std::string key = trim(entry.substr(0, eq));
    const std::string value = trim(entry.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    CLI::Option* opt = cmd->get_option_no_throw("--" + key);
    if (opt == nullptr) throw ConfigError(where + ": unknown key '" + key + "'");
    if (opt->count() > 0) continue;
    try {
      opt->add_result(value);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw ConfigError(where + ": bad value for '" + key + "': " + e.what());
    }
  }
}

void add_train_options(CLI::App* cmd, TrainOpts& o, bool with_psi = true) {
  cmd->add_option("--split", o.split, "dataset directory from build-dataset")
      ->required()
      ->check(CLI::ExistingDirectory);
  cmd->add_option("--out", o.out, "output run directory")->required();
  cmd->add_option("--lr", o.lr, "learning rate")->capture_default_str();
  cmd->add_option("--lambda", o.lambda, "L2 weight on looked-up rows")->capture_default_str();
  cmd->add_option("--neg-ratio", o.neg_ratio, "negatives per positive")->capture_default_str();
  if (with_psi) {
    cmd->add_option("--psi", o.psi, "per-triple aggregation probability (0 = transductive)")->capture_default_str();
  }
  cmd->add_option("--dim", o.dim, "embedding dimension")->capture_default_str();
  cmd->add_option("--epochs", o.epochs, "training epochs")->capture_default_str();
  cmd->add_option("--batch-size", o.batch_size, "positives per batch")->capture_default_str();
  cmd->add_option("--eval-every", o.eval_every, "epochs between validation passes")->capture_default_str();
  cmd->add_option("--seed", o.seed, "RNG seed")->capture_default_str()->envname("OOSKGE_SEED");
  cmd->add_option("--aggregator", o.aggregator, "eravg | ls | ls-u | eavg")->capture_default_str();
  o.agg_lambda_opt =
      cmd->add_option("--agg-lambda", o.agg_lambda,
                      "ridge weight for ls / ls-u (defaults to --lambda)");
  cmd->add_flag("--no-validate", o.no_validate, "skip validation-based model selection");
  cmd->add_option("--config", o.config_path, "key=value file of defaults; command-line flags win")
      ->check(CLI::ExistingFile);
}

TrainConfig resolve_config(const TrainOpts& o, double psi) {
  TrainConfig cfg;
  cfg.lr = o.lr;
  cfg.lambda = o.lambda;
  cfg.neg_ratio = o.neg_ratio;
  cfg.psi = psi;
  cfg.dim = o.dim;
  cfg.epochs = o.epochs;
  cfg.batch_size = o.batch_size;
  cfg.eval_every = o.eval_every;
  cfg.seed = o.seed;
  cfg.aggregator.kind = parse_aggregator(o.aggregator);
  cfg.aggregator.lambda = o.agg_lambda_opt->count() > 0 ? o.agg_lambda : o.lambda;
  cfg.validate();
  return cfg;
}

std::string run_log_text(const std::vector<EpochLog>& log) {
  std::string text = "epoch\tloss\tvalid_mrr\n";
  for (const EpochLog& row : log) {
    text += std::to_string(row.epoch) + "\t" + g17(row.loss) + "\t";
    if (row.has_valid_mrr) text += g17(row.valid_mrr);
    text += "\n";
  }
  return text;
}

void fill_train_manifest(KvFile& manifest, const TrainOpts& o, const TrainConfig& cfg,
                         const TrainResult& res) {
  manifest.set("split", o.split);
  record_dataset_checksums(manifest, o.split);
  manifest.set_u64("seed", cfg.seed);
  manifest.set_double("lr", cfg.lr);
  manifest.set_double("lambda", cfg.lambda);
  manifest.set_u64("neg_ratio", static_cast<std::uint64_t>(cfg.neg_ratio));
  manifest.set_double("psi", cfg.psi);
  manifest.set_u64("dim", cfg.dim);
  manifest.set_u64("epochs", cfg.epochs);
  manifest.set_u64("batch_size", cfg.batch_size);
  manifest.set_u64("eval_every", cfg.eval_every);
  manifest.set("aggregator", std::string(aggregator_name(cfg.aggregator.kind)));
  manifest.set_double("agg_lambda", cfg.aggregator.lambda);
  manifest.set("validate", o.no_validate ? "0" : "1");
  manifest.set("checkpoint", "checkpoint.bin");
  manifest.set("run_log", "run_log.tsv");
  if (res.best_epoch > 0) {
    manifest.set_u64("best_epoch", res.best_epoch);
    manifest.set_double("best_valid_mrr", res.best_valid_mrr);
  }
}

int run_train(const TrainOpts& o) {
  const auto start = std::chrono::steady_clock::now();
  const OutOfSampleSplit split = read_split(o.split);
  const TrainConfig cfg = resolve_config(o, o.psi);
  const std::vector<OosGroup>* valid = o.no_validate ? nullptr : &split.valid;

  const TrainResult res = train(split.train, cfg, valid);

  fs::create_directories(o.out);
  save_checkpoint(res.model, fs::path(o.out) / "checkpoint.bin");
  write_text(fs::path(o.out) / "run_log.tsv", run_log_text(res.log));

  KvFile manifest;
  manifest.set("command", "train");
  fill_train_manifest(manifest, o, cfg, res);
  manifest.set("seconds", gshort(elapsed_seconds(start)));
  manifest.write(fs::path(o.out) / "manifest.txt");

  std::cout << "trained " << cfg.epochs << " epochs";
  if (res.best_epoch > 0) {
    std::cout << "; best validation mrr " << gshort(res.best_valid_mrr) << " at epoch "
              << res.best_epoch;
  }
  std::cout << "; checkpoint written to " << o.out << "\n";
  return 0;
}

// ---- evaluate --------------------------------------------------------------

struct EvalOpts {
  std::string split;
  std::string checkpoint;
  std::string out;
  std::string aggregator = "eravg";
  double agg_lambda = 0.01;
  std::string queries = "test";
  std::string baseline;
  std::uint64_t seed = 0;
  int threads = 0;
  bool force = false;

  CLI::Option* aggregator_opt = nullptr;
  CLI::Option* agg_lambda_opt = nullptr;
};

int run_evaluate(const EvalOpts& o) {
  const auto start = std::chrono::steady_clock::now();
  if (o.baseline != "popularity" && o.checkpoint.empty()) {
    throw ConfigError("--checkpoint is required unless --baseline popularity is used");
  }

  const OutOfSampleSplit split = read_split(o.split);
  const QuerySet set = o.queries == "valid" ? QuerySet::kValid : QuerySet::kTest;
  const EvalOptions eval_opts{o.threads};

  AggregatorConfig agg;
  agg.kind = parse_aggregator(o.aggregator);
  agg.lambda = o.agg_lambda;

  RankingReport report;
  if (o.baseline == "popularity") {
    report = baseline_popularity(split, o.seed, set, eval_opts);
  } else {
    // A manifest next to the checkpoint pins the dataset contents and the
    // training-time aggregator; explicit flags override the latter.
    const fs::path manifest_path = fs::path(o.checkpoint).parent_path() / "manifest.txt";
    if (fs::exists(manifest_path)) {
      const KvFile manifest = KvFile::read(manifest_path);
      if (!o.force) verify_dataset_checksums(manifest, o.split);
      if (o.aggregator_opt->count() == 0) {
        if (const auto v = manifest.get("aggregator")) agg.kind = parse_aggregator(*v);
      }
      if (o.agg_lambda_opt->count() == 0) {
        if (const auto v = manifest.get("agg_lambda")) agg.lambda = std::stod(*v);
      }
    }
    const EmbeddingModel model = load_checkpoint(o.checkpoint);
    if (o.baseline == "oov") {
      report = baseline_oov(split, model, set, eval_opts);
    } else {
      report = evaluate(split, model, agg, set, eval_opts);
    }
  }

  write_report(report, o.out);

  KvFile manifest;
  manifest.set("command", "evaluate");
  manifest.set("split", o.split);
  record_dataset_checksums(manifest, o.split);
  if (!o.checkpoint.empty()) manifest.set("checkpoint", o.checkpoint);
  if (!o.baseline.empty()) {
    manifest.set("baseline", o.baseline);
  } else {
    manifest.set("aggregator", std::string(aggregator_name(agg.kind)));
    manifest.set_double("agg_lambda", agg.lambda);
  }
  manifest.set("queries", o.queries);
  manifest.set_u64("seed", o.seed);
  manifest.set("seconds", gshort(elapsed_seconds(start)));
  manifest.write(fs::path(o.out) / "manifest.txt");

  std::cout << report.records.size() << " queries: mrr " << gshort(report.mrr) << ", hit@1 "
            << gshort(report.hit1) << ", hit@3 " << gshort(report.hit3) << ", hit@10 "
            << gshort(report.hit10) << "; report written to " << o.out << "\n";
  return 0;
}

// ---- sweep-psi -------------------------------------------------------------

struct SweepOpts {
  TrainOpts train;
  std::vector<double> psi_list;
};

int run_sweep_psi(const SweepOpts& o) {
  std::vector<double> psis = o.psi_list;
  std::sort(psis.begin(), psis.end());
  psis.erase(std::unique(psis.begin(), psis.end()), psis.end());

  const OutOfSampleSplit split = read_split(o.train.split);
  const std::vector<OosGroup>* valid = o.train.no_validate ? nullptr : &split.valid;

  std::string tsv = "psi\tmrr\n";
  for (double psi : psis) {
    const auto start = std::chrono::steady_clock::now();
    const TrainConfig cfg = resolve_config(o.train, psi);
    const TrainResult res = train(split.train, cfg, valid);
    const RankingReport report =
        evaluate(split, res.model, cfg.aggregator, QuerySet::kTest, EvalOptions{});

    const fs::path run_dir = fs::path(o.train.out) / ("psi_" + gshort(psi));
    fs::create_directories(run_dir);
    save_checkpoint(res.model, run_dir / "checkpoint.bin");
    write_text(run_dir / "run_log.tsv", run_log_text(res.log));
    write_report(report, run_dir.string());

    KvFile manifest;
    manifest.set("command", "sweep-psi");
    fill_train_manifest(manifest, o.train, cfg, res);
    manifest.set("seconds", gshort(elapsed_seconds(start)));
    manifest.write(run_dir / "manifest.txt");

    tsv += gshort(psi) + "\t" + g17(report.mrr) + "\n";
    std::cout << "psi " << gshort(psi) << ": test mrr " << gshort(report.mrr) << "\n";
  }

  fs::create_directories(o.train.out);
  write_text(fs::path(o.train.out) / "psi_sweep.tsv", tsv);
  std::cout << "sweep written to " << (fs::path(o.train.out) / "psi_sweep.tsv").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Out-of-sample knowledge graph embedding toolkit"};
  app.require_subcommand(1);

  BuildOpts build_opts;
  CLI::App* build = app.add_subcommand(
      "build-dataset", "construct an out-of-sample split from triple files");
  build->add_option("--input", build_opts.inputs, "triple TSV file (repeatable; files are merged)")
      ->required()
      ->check(CLI::ExistingFile);
  build->add_option("--out", build_opts.out, "output dataset directory")->required();
  build->add_option("--oos-fraction", build_opts.fraction,
                    "fraction of eligible entities held out")->capture_default_str();
  build->add_option("--seed", build_opts.seed, "RNG seed")->capture_default_str()->envname("OOSKGE_SEED");

  TrainOpts train_opts;
  CLI::App* train_cmd =
      app.add_subcommand("train", "train embeddings on a dataset's train graph");
  add_train_options(train_cmd, train_opts);

  EvalOpts eval_opts;
  CLI::App* eval_cmd =
      app.add_subcommand("evaluate", "rank out-of-sample queries with a trained checkpoint");
  eval_cmd->add_option("--split", eval_opts.split, "dataset directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--checkpoint", eval_opts.checkpoint, "trained checkpoint file")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", eval_opts.out, "output report directory")->required();
  eval_opts.aggregator_opt = eval_cmd->add_option(
      "--aggregator", eval_opts.aggregator, "eravg | ls | ls-u | eavg (default: from manifest)");
  eval_opts.agg_lambda_opt =
      eval_cmd->add_option("--agg-lambda", eval_opts.agg_lambda, "ridge weight for ls / ls-u");
  eval_cmd->add_option("--queries", eval_opts.queries, "test | valid")->capture_default_str()
      ->check(CLI::IsMember({"test", "valid"}));
  eval_cmd->add_option("--baseline", eval_opts.baseline, "popularity | oov")
      ->check(CLI::IsMember({"popularity", "oov"}));
  eval_cmd->add_option("--seed", eval_opts.seed, "tie-break seed for --baseline popularity")->capture_default_str()
      ->envname("OOSKGE_SEED");
  eval_cmd->add_option("--threads", eval_opts.threads,
                       "evaluation threads (0 = library default, 1 = serial)")->capture_default_str();
  eval_cmd->add_flag("--force", eval_opts.force, "skip dataset checksum verification");

  SweepOpts sweep_opts;
  CLI::App* sweep =
      app.add_subcommand("sweep-psi", "train and evaluate one model per psi value");
  add_train_options(sweep, sweep_opts.train, /*with_psi=*/false);
  sweep->add_option("--psi-list", sweep_opts.psi_list, "psi values to sweep")
      ->required()
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (build->parsed()) return run_build_dataset(build_opts);
    if (train_cmd->parsed()) {
      apply_config_file(train_cmd, train_opts.config_path);
      return run_train(train_opts);
    }
    if (eval_cmd->parsed()) return run_evaluate(eval_opts);
    if (sweep->parsed()) {
      apply_config_file(sweep, sweep_opts.train.config_path);
      return run_sweep_psi(sweep_opts);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
