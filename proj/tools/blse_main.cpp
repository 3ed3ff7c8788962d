// Command-line front end: every pipeline, experiment and report writer in
// one binary. Each run writes its outputs plus a manifest.csv (effective
// config, seed, FNV-1a hash per artifact) into --out.

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "blse/corpus.hpp"
#include "blse/embeddings.hpp"
#include "blse/eval.hpp"
#include "blse/forest.hpp"
#include "blse/lexicon.hpp"
#include "blse/model.hpp"
#include "blse/pipelines.hpp"
#include "blse/sgns.hpp"
#include "blse/svm.hpp"
#include "blse/synth.hpp"
#include "blse/util.hpp"

namespace fs = std::filesystem;
using namespace blse;

namespace {

std::string csv_escape(const std::string& value) {
  if (value.find_first_of(",\"\n") == std::string::npos) return value;
  std::string quoted = "\"";
  for (char ch : value) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  quoted += '"';
  return quoted;
}

std::string hex16(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

// Collects artifact paths as they are written so the manifest can hash them.
struct RunOutputs {
  std::string dir;
  std::vector<std::string> paths;

  explicit RunOutputs(const std::string& out_dir) : dir(out_dir) {
    require(!dir.empty(), "--out directory is required");
    fs::create_directories(dir);
  }
  std::string path(const std::string& name) const {
    return (fs::path(dir) / name).string();
  }
  void write(const std::string& name, std::string_view content) {
    std::string p = path(name);
    write_file(p, content);
    paths.push_back(std::move(p));
  }
  void note(std::string p) { paths.push_back(std::move(p)); }
  void note_all(std::vector<std::string> written) {
    for (std::string& p : written) paths.push_back(std::move(p));
  }
};

void write_manifest(const CLI::App& cmd, const RunOutputs& outputs) {
  std::string csv = "key,value\n";
  csv += "subcommand," + cmd.get_name() + "\n";
  for (const CLI::Option* opt : cmd.get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name == "config") continue;
    std::string value;
    if (opt->count() > 0) {
      const std::vector<std::string>& got = opt->results();
      for (std::size_t i = 0; i < got.size(); ++i) {
        if (i) value += ';';
        value += got[i];
      }
      if (got.empty()) value = "true";
    } else {
      value = opt->get_default_str();
    }
    csv += name + "," + csv_escape(value) + "\n";
  }
  for (const std::string& p : outputs.paths)
    csv += "hash:" + fs::path(p).filename().string() + "," + hex16(fnv1a64_file(p)) + "\n";
  write_file((fs::path(outputs.dir) / "manifest.csv").string(), csv);
}

Scheme parse_scheme(const std::string& name) {
  if (name == "binary") return Scheme::Binary;
  if (name == "4class") return Scheme::FourClass;
  fail("unknown scheme: " + name);
}

// One corpus from per-split TSV files; empty paths are skipped.
LabeledCorpus load_split_files(const std::string& train_path, const std::string& dev_path,
                               const std::string& test_path, Scheme scheme) {
  LabeledCorpus corpus;
  corpus.scheme = scheme;
  auto append = [&](const std::string& path, Split split) {
    if (path.empty()) return;
    LabeledCorpus part = load_corpus(path, scheme);
    for (Example& ex : part.examples) {
      ex.split = split;
      corpus.examples.push_back(std::move(ex));
    }
  };
  append(train_path, Split::Train);
  append(dev_path, Split::Dev);
  append(test_path, Split::Test);
  require(!corpus.examples.empty(), "no corpus file given");
  return corpus;
}

std::vector<std::string> load_word_list(const std::string& path) {
  std::vector<std::string> words;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    for (std::string_view token : split_whitespace(line)) words.emplace_back(token);
  }
  require(!words.empty(), "empty word list: " + path);
  return words;
}

std::vector<int> argmax_labels(const Eigen::MatrixXd& probs) {
  std::vector<int> labels(static_cast<std::size_t>(probs.rows()));
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    int best = 0;
    for (int j = 1; j < probs.cols(); ++j)
      if (probs(i, j) > probs(i, best)) best = j;
    labels[static_cast<std::size_t>(i)] = best;
  }
  return labels;
}

std::string c_grid_csv(const SvmPipelineResult& result) {
  std::string csv = "c,dev_macro_f1,selected\n";
  for (const auto& [c, f1] : result.c_grid)
    csv += format_g17(c) + "," + format_g17(f1) + "," +
           (c == result.chosen_c ? "1" : "0") + "\n";
  return csv;
}

void write_svm_outputs(const SvmPipelineResult& result, RunOutputs& outputs) {
  outputs.write("report.csv", result.test_report.to_csv());
  outputs.write("predictions.csv", predictions_to_csv(result.predictions));
  outputs.write("c_grid.csv", c_grid_csv(result));
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string config_file;
  std::string src_embeddings, tgt_embeddings, lexicon;
  std::string src_train, src_dev, src_test, tgt_dev, tgt_test;
  std::string scheme = "binary";
  std::string out;
  double alpha = 0.3;
  int epochs = 200;
  int batch = 50;
  double lr = 0.003;
  int joint_dim = 0;
  bool ablate = false;
  double lexicon_holdout = 0.1;
  std::uint64_t seed = 1;
  std::vector<double> grid_alpha;
  std::vector<int> grid_epochs, grid_batch;
};

void write_blse_outputs(const BlsePipelineResult& result, RunOutputs& outputs) {
  std::string model_path = outputs.path("model.txt");
  save_model(result.trained.model, model_path);
  outputs.note(std::move(model_path));
  if (result.source_dev_report.example_count > 0)
    outputs.write("src_dev_report.csv", result.source_dev_report.to_csv());
  if (result.has_target) {
    if (result.target_dev_report.example_count > 0)
      outputs.write("tgt_dev_report.csv", result.target_dev_report.to_csv());
    if (result.target_test_report.example_count > 0)
      outputs.write("tgt_test_report.csv", result.target_test_report.to_csv());
    outputs.write("predictions.csv", predictions_to_csv(result.predictions));
  }
}

int run_train_command(const TrainArgs& a, const CLI::App& cmd) {
  require(!a.src_embeddings.empty(), "--src-embeddings is required");
  require(!a.tgt_embeddings.empty(), "--tgt-embeddings is required");
  require(!a.lexicon.empty(), "--lexicon is required");
  require(!a.src_train.empty(), "--src-train is required");
  require(!a.out.empty(), "--out directory is required");
  const Scheme scheme = parse_scheme(a.scheme);
  const EmbeddingStore S = EmbeddingStore::load_text(a.src_embeddings, "source");
  const EmbeddingStore T = EmbeddingStore::load_text(a.tgt_embeddings, "target");
  const BilingualLexicon lexicon = load_lexicon(a.lexicon);
  const LabeledCorpus source = load_split_files(a.src_train, a.src_dev, a.src_test, scheme);
  const bool has_target = !a.tgt_dev.empty() || !a.tgt_test.empty();
  LabeledCorpus target;
  if (has_target) target = load_split_files("", a.tgt_dev, a.tgt_test, scheme);

  BlsePipelineConfig base;
  base.train.alpha = a.alpha;
  base.train.epochs = a.epochs;
  base.train.batch_size = a.batch;
  base.train.learning_rate = a.lr;
  base.train.seed = a.seed;
  base.train.ablate_mprime = a.ablate;
  base.train.joint_dim = a.joint_dim;
  base.lexicon_holdout = a.lexicon_holdout;

  RunOutputs outputs(a.out);
  const bool grid_mode =
      !a.grid_alpha.empty() || !a.grid_epochs.empty() || !a.grid_batch.empty();

  BlsePipelineResult chosen;
  if (!grid_mode) {
    chosen = run_blse(S, T, lexicon, source, has_target ? &target : nullptr, base);
    outputs.write("trace.csv", trace_to_csv(chosen.trained.trace));
  } else {
    const std::vector<double> alphas =
        a.grid_alpha.empty() ? std::vector<double>{a.alpha} : a.grid_alpha;
    const std::vector<int> epoch_grid =
        a.grid_epochs.empty() ? std::vector<int>{a.epochs} : a.grid_epochs;
    const std::vector<int> batch_grid =
        a.grid_batch.empty() ? std::vector<int>{a.batch} : a.grid_batch;

    struct GridRow {
      int index;
      double alpha;
      int epochs;
      int batch;
      double dev_f1;
    };
    std::vector<GridRow> rows;
    double best = -1.0;
    int best_index = 0;
    int index = 0;
    for (double alpha : alphas)
      for (int epochs : epoch_grid)
        for (int batch : batch_grid) {
          BlsePipelineConfig point = base;
          point.train.alpha = alpha;
          point.train.epochs = epochs;
          point.train.batch_size = batch;
          BlsePipelineResult result =
              run_blse(S, T, lexicon, source, has_target ? &target : nullptr, point);
          outputs.write("trace_" + std::to_string(index) + ".csv",
                        trace_to_csv(result.trained.trace));
          const double dev_f1 = has_target ? result.target_dev_report.macro_f1
                                           : result.source_dev_report.macro_f1;
          rows.push_back({index, alpha, epochs, batch, dev_f1});
          if (dev_f1 > best) {
            best = dev_f1;
            best_index = index;
            chosen = std::move(result);
          }
          ++index;
        }
    std::string grid_csv = "index,alpha,epochs,batch_size,dev_f1,selected\n";
    for (const GridRow& row : rows)
      grid_csv += std::to_string(row.index) + "," + format_g17(row.alpha) + "," +
                  std::to_string(row.epochs) + "," + std::to_string(row.batch) + "," +
                  format_g17(row.dev_f1) + "," +
                  (row.index == best_index ? "1" : "0") + "\n";
    outputs.write("grid.csv", grid_csv);
  }

  write_blse_outputs(chosen, outputs);
  write_manifest(cmd, outputs);
  return 0;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string config_file;
  std::string model, embeddings, corpus;
  std::string side = "target";
  std::string scheme = "binary";
  std::string pred_a, pred_b;
  std::string out;
  int runs = 10000;
  std::uint64_t seed = 1;
};

int run_eval_command(const EvalArgs& a, const CLI::App& cmd) {
  RunOutputs outputs(a.out);
  bool did_any = false;

  if (!a.model.empty()) {
    require(!a.embeddings.empty() && !a.corpus.empty(),
            "eval: --model needs --embeddings and --corpus");
    const BlseModel model = load_model(a.model);
    const EmbeddingStore store = EmbeddingStore::load_text(a.embeddings);
    const LabeledCorpus corpus = load_corpus(a.corpus, parse_scheme(a.scheme));
    require(model.class_count == corpus.class_count(),
            "eval: model expects " + std::to_string(model.class_count) +
                " classes, corpus has " + std::to_string(corpus.class_count()));
    std::vector<int> gold, pred;
    gold.reserve(corpus.examples.size());
    pred.reserve(corpus.examples.size());
    for (const Example& ex : corpus.examples) {
      gold.push_back(ex.label);
      const Prediction p = a.side == "source" ? predict_source(model, store, ex.tokens)
                                              : predict_target(model, store, ex.tokens);
      pred.push_back(p.label);
    }
    outputs.write("report.csv", score(gold, pred, corpus.class_count()).to_csv());
    did_any = true;
  }

  if (!a.pred_a.empty() || !a.pred_b.empty()) {
    require(!a.pred_a.empty() && !a.pred_b.empty(),
            "eval: significance needs both --pred-a and --pred-b");
    const PredictionSet pa = load_predictions(a.pred_a);
    const PredictionSet pb = load_predictions(a.pred_b);
    require(pa.class_count == pb.class_count, "significance: class counts differ");
    require(pa.test_gold == pb.test_gold, "significance: test gold labels differ");
    require(!pa.test_gold.empty(), "significance: no test rows");
    const SignificanceResult sig =
        approx_randomization(pa.test_gold, argmax_labels(pa.test_probs),
                             argmax_labels(pb.test_probs), pa.class_count, a.runs, a.seed);
    outputs.write("significance.csv",
                  "p_value,runs,observed_diff\n" + format_g17(sig.p_value) + "," +
                      std::to_string(sig.runs) + "," + format_g17(sig.observed_diff) + "\n");
    did_any = true;
  }

  require(did_any, "eval: give --model or --pred-a/--pred-b");
  write_manifest(cmd, outputs);
  return 0;
}

// ---------------------------------------------------------------------------

struct BaselineArgs {
  std::string config_file;
  std::string kind;
  std::string src_embeddings, tgt_embeddings, lexicon;
  std::string src_train, src_dev, src_test;
  std::string tgt_train, tgt_dev, tgt_test;
  std::string mt_dev, mt_test;
  std::string scheme = "binary";
  std::string out;
  bool orthogonal = false;
  int sgns_dim = 100;
  int sgns_window = 5;
  int sgns_negative = 15;
  int sgns_epochs = 5;
  double sgns_lr = 0.025;
  double sgns_subsample = 1e-4;
  int sgns_min_count = 5;
  std::uint64_t seed = 1;
};

int run_baseline_command(const BaselineArgs& a, const CLI::App& cmd) {
  const Scheme scheme = parse_scheme(a.scheme);
  auto need = [&](const std::string& value, const char* flag) {
    require(!value.empty(), "baseline " + a.kind + ": missing " + flag);
  };
  RunOutputs outputs(a.out);

  SvmPipelineResult result;
  if (a.kind == "mono") {
    need(a.src_embeddings, "--src-embeddings");
    need(a.src_train, "--src-train");
    need(a.src_dev, "--src-dev");
    need(a.src_test, "--src-test");
    const EmbeddingStore store = EmbeddingStore::load_text(a.src_embeddings);
    result = run_mono(store, load_split_files(a.src_train, a.src_dev, a.src_test, scheme),
                      a.seed);
  } else if (a.kind == "mt") {
    need(a.src_embeddings, "--src-embeddings");
    need(a.src_train, "--src-train");
    need(a.mt_dev, "--mt-dev");
    need(a.mt_test, "--mt-test");
    const EmbeddingStore store = EmbeddingStore::load_text(a.src_embeddings, "source");
    result = run_mt(store, load_split_files(a.src_train, a.src_dev, "", scheme),
                    load_split_files("", a.mt_dev, a.mt_test, scheme), a.seed);
  } else if (a.kind == "artetxe") {
    need(a.src_embeddings, "--src-embeddings");
    need(a.tgt_embeddings, "--tgt-embeddings");
    need(a.lexicon, "--lexicon");
    need(a.src_train, "--src-train");
    need(a.tgt_dev, "--tgt-dev");
    need(a.tgt_test, "--tgt-test");
    const EmbeddingStore S = EmbeddingStore::load_text(a.src_embeddings, "source");
    const EmbeddingStore T = EmbeddingStore::load_text(a.tgt_embeddings, "target");
    result = run_artetxe(S, T, load_lexicon(a.lexicon),
                         load_split_files(a.src_train, a.src_dev, "", scheme),
                         load_split_files("", a.tgt_dev, a.tgt_test, scheme),
                         a.orthogonal, a.seed);
  } else {
    need(a.lexicon, "--lexicon");
    need(a.src_train, "--src-train");
    need(a.tgt_dev, "--tgt-dev");
    need(a.tgt_test, "--tgt-test");
    SgnsConfig sgns;
    sgns.dim = a.sgns_dim;
    sgns.window = a.sgns_window;
    sgns.negative = a.sgns_negative;
    sgns.epochs = a.sgns_epochs;
    sgns.learning_rate = a.sgns_lr;
    sgns.subsample = a.sgns_subsample;
    sgns.min_count = a.sgns_min_count;
    sgns.seed = a.seed;
    sgns.language_tag = "mixed";
    BaristaResult barista =
        run_barista(load_split_files(a.src_train, a.src_dev, a.src_test, scheme),
                    load_split_files(a.tgt_train, a.tgt_dev, a.tgt_test, scheme),
                    load_lexicon(a.lexicon), sgns, a.seed);
    std::string pseudo_path = outputs.path("pseudo_corpus.tsv");
    save_corpus(barista.pseudo_corpus, pseudo_path);
    outputs.note(std::move(pseudo_path));
    std::string mixed_path = outputs.path("mixed_embeddings.txt");
    barista.mixed_store.save_text(mixed_path);
    outputs.note(std::move(mixed_path));
    result = std::move(barista.svm);
  }

  write_svm_outputs(result, outputs);
  write_manifest(cmd, outputs);
  return 0;
}

// ---------------------------------------------------------------------------

struct EnsembleArgs {
  std::string config_file;
  std::string pred_a, pred_b;
  std::string out;
  int trees = 200;
  int max_depth = 0;
  std::uint64_t seed = 1;
};

int run_ensemble_command(const EnsembleArgs& a, const CLI::App& cmd) {
  require(!a.pred_a.empty(), "--pred-a is required");
  require(!a.pred_b.empty(), "--pred-b is required");
  RunOutputs outputs(a.out);
  ForestConfig config;
  config.tree_count = a.trees;
  config.max_depth = a.max_depth;
  config.seed = a.seed;
  const EnsembleResult result =
      run_ensemble(load_predictions(a.pred_a), load_predictions(a.pred_b), config);
  outputs.write("report.csv", result.test_report.to_csv());
  outputs.write("predictions.csv", predictions_to_csv(result.predictions));
  write_manifest(cmd, outputs);
  return 0;
}

// ---------------------------------------------------------------------------

struct ExperimentArgs {
  std::string config_file;
  std::string kind;
  std::string src_embeddings, tgt_embeddings, lexicon;
  std::string src_train, src_dev;
  std::string tgt_dev, tgt_test;
  std::string src_positive, src_negative, tgt_positive, tgt_negative;
  std::string scheme = "binary";
  std::string out;
  double alpha = 0.3;
  int epochs = 200;
  int batch = 50;
  double lr = 0.003;
  int joint_dim = 0;
  double lexicon_holdout = 0.1;
  std::vector<int> sizes;
  std::uint64_t seed = 1;
};

int run_experiment_command(const ExperimentArgs& a, const CLI::App& cmd) {
  const Scheme scheme = parse_scheme(a.scheme);
  auto need = [&](const std::string& value, const char* flag) {
    require(!value.empty(), "experiment " + a.kind + ": missing " + flag);
  };
  need(a.src_embeddings, "--src-embeddings");
  need(a.tgt_embeddings, "--tgt-embeddings");
  need(a.lexicon, "--lexicon");
  need(a.src_train, "--src-train");
  const EmbeddingStore S = EmbeddingStore::load_text(a.src_embeddings, "source");
  const EmbeddingStore T = EmbeddingStore::load_text(a.tgt_embeddings, "target");
  const BilingualLexicon lexicon = load_lexicon(a.lexicon);
  const LabeledCorpus source = load_split_files(a.src_train, a.src_dev, "", scheme);

  TrainConfig base;
  base.alpha = a.alpha;
  base.epochs = a.epochs;
  base.batch_size = a.batch;
  base.learning_rate = a.lr;
  base.seed = a.seed;
  base.joint_dim = a.joint_dim;

  RunOutputs outputs(a.out);
  if (a.kind == "lexicon-sweep") {
    need(a.tgt_dev, "--tgt-dev");
    need(a.tgt_test, "--tgt-test");
    const LabeledCorpus target = load_split_files("", a.tgt_dev, a.tgt_test, scheme);
    const std::vector<int> sizes = a.sizes.empty() ? default_sweep_sizes() : a.sizes;
    outputs.write("sweep.csv",
                  sweep_to_csv(lexicon_sweep(S, T, lexicon, source, target, base, sizes)));
  } else if (a.kind == "ablate-mprime") {
    need(a.tgt_dev, "--tgt-dev");
    const LabeledCorpus target = load_split_files("", a.tgt_dev, a.tgt_test, scheme);
    const AblationOutcome outcome = run_ablation(S, T, lexicon, source, target, base);
    outputs.write("ablation.csv", ablation_to_csv(outcome));
    outputs.write("trace_full.csv", trace_to_csv(outcome.full.trace));
    outputs.write("trace_ablated.csv", trace_to_csv(outcome.ablated.trace));
  } else {
    need(a.src_positive, "--src-positive");
    need(a.src_negative, "--src-negative");
    need(a.tgt_positive, "--tgt-positive");
    need(a.tgt_negative, "--tgt-negative");
    const bool has_target = !a.tgt_dev.empty() || !a.tgt_test.empty();
    LabeledCorpus target;
    if (has_target) target = load_split_files("", a.tgt_dev, a.tgt_test, scheme);
    BlsePipelineConfig config;
    config.train = base;
    config.lexicon_holdout = a.lexicon_holdout;
    const CosineTraceResult result = run_cosine_trace(
        S, T, lexicon, source, has_target ? &target : nullptr, config,
        load_word_list(a.src_positive), load_word_list(a.src_negative),
        load_word_list(a.tgt_positive), load_word_list(a.tgt_negative));
    outputs.write("cosine_trace.csv", cosine_trace_to_csv(result.records));
    outputs.write("trace.csv", trace_to_csv(result.trained.trace));
  }

  write_manifest(cmd, outputs);
  return 0;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string config_file;
  SynthConfig config;
  std::string out;
};

int run_synth_command(const SynthArgs& a, const CLI::App& cmd) {
  RunOutputs outputs(a.out);
  outputs.note_all(save_world(generate(a.config), a.out));
  write_manifest(cmd, outputs);
  return 0;
}

// ---------------------------------------------------------------------------

void add_config_file(CLI::App* cmd, std::string& path) {
  cmd->add_option("--config", path, "key=value file; command-line flags override it")
      ->check(CLI::ExistingFile);
}

// Merges a key=value file into every option the command line left unset.
// Keys are the long flag names without the dashes; '#' starts a comment.
// Values go through the same conversion and checks as command-line input.
void apply_config_file(CLI::App* cmd, const std::string& path) {
  if (path.empty()) return;
  const auto trim = [](std::string s) {
    const auto is_space = [](unsigned char ch) { return std::isspace(ch) != 0; };
    while (!s.empty() && is_space(static_cast<unsigned char>(s.back()))) s.pop_back();
    std::size_t start = 0;
    while (start < s.size() && is_space(static_cast<unsigned char>(s[start]))) ++start;
    return s.substr(start);
  };
  std::istringstream in(read_file(path));
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string at = path + ":" + std::to_string(lineno);
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(std::move(line));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, at + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    require(!key.empty(), at + ": empty key");
    CLI::Option* opt = key == "config" || key == "help"
                           ? nullptr
                           : cmd->get_option_no_throw("--" + key);
    require(opt != nullptr, at + ": unknown key '" + key + "'");
    if (opt->count() > 0) continue;  // flags override the file
    opt->add_result(value);
    opt->run_callback();
  }
}

void add_train_hyper_options(CLI::App* cmd, double& alpha, int& epochs, int& batch,
                             double& lr, int& joint_dim) {
  cmd->add_option("--alpha", alpha, "weight of the sentiment loss term")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd->add_option("--epochs", epochs, "training epochs")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--batch", batch, "minibatch size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--lr", lr, "ADAM learning rate")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--joint-dim", joint_dim,
                  "joint space width; 0 uses the source dim (target dim when ablated)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bilingual sentiment embeddings: training, baselines, experiments"};
  app.require_subcommand(1);

  TrainArgs train_args;
  CLI::App* train_cmd =
      app.add_subcommand("train-blse", "train the joint bilingual sentiment model");
  add_config_file(train_cmd, train_args.config_file);
  train_cmd->add_option("--src-embeddings", train_args.src_embeddings, "source embedding text file (required)")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--tgt-embeddings", train_args.tgt_embeddings, "target embedding text file (required)")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--lexicon", train_args.lexicon, "translation pair TSV (required)")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--src-train", train_args.src_train, "source train TSV (required)")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--src-dev", train_args.src_dev, "source dev TSV")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--src-test", train_args.src_test, "source test TSV")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--tgt-dev", train_args.tgt_dev, "target dev TSV (model selection)")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--tgt-test", train_args.tgt_test, "target test TSV")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--scheme", train_args.scheme, "label scheme")
      ->check(CLI::IsMember({"binary", "4class"}))
      ->capture_default_str();
  train_cmd->add_option("--out", train_args.out, "output directory (required)");
  add_train_hyper_options(train_cmd, train_args.alpha, train_args.epochs,
                          train_args.batch, train_args.lr, train_args.joint_dim);
  train_cmd->add_flag("--ablate", train_args.ablate, "drop the target projector")
      ->capture_default_str();
  train_cmd
      ->add_option("--lexicon-holdout", train_args.lexicon_holdout,
                   "fraction of pairs held out for cosine monitoring")
      ->check(CLI::Range(0.0, 0.9))
      ->capture_default_str();
  train_cmd->add_option("--seed", train_args.seed, "RNG seed")->capture_default_str();
  train_cmd
      ->add_option("--grid-alpha", train_args.grid_alpha, "comma list of alphas to grid over")
      ->delimiter(',');
  train_cmd
      ->add_option("--grid-epochs", train_args.grid_epochs, "comma list of epoch budgets")
      ->delimiter(',');
  train_cmd
      ->add_option("--grid-batch", train_args.grid_batch, "comma list of batch sizes")
      ->delimiter(',');

  EvalArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand(
      "eval", "score a model on a corpus, or compare two prediction files");
  add_config_file(eval_cmd, eval_args.config_file);
  eval_cmd->add_option("--model", eval_args.model, "trained model file")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--embeddings", eval_args.embeddings, "embedding text file")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--corpus", eval_args.corpus, "labeled TSV to score")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--side", eval_args.side, "which projector the corpus goes through")
      ->check(CLI::IsMember({"source", "target"}))
      ->capture_default_str();
  eval_cmd->add_option("--scheme", eval_args.scheme, "label scheme")
      ->check(CLI::IsMember({"binary", "4class"}))
      ->capture_default_str();
  eval_cmd->add_option("--pred-a", eval_args.pred_a, "prediction CSV of system A")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--pred-b", eval_args.pred_b, "prediction CSV of system B")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--runs", eval_args.runs, "randomization runs")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  eval_cmd->add_option("--seed", eval_args.seed, "RNG seed")->capture_default_str();
  eval_cmd->add_option("--out", eval_args.out, "output directory (required)");

  BaselineArgs baseline_args;
  CLI::App* baseline_cmd =
      app.add_subcommand("baseline", "run one of the reference pipelines");
  add_config_file(baseline_cmd, baseline_args.config_file);
  baseline_cmd->add_option("kind", baseline_args.kind, "which baseline")
      ->required()
      ->check(CLI::IsMember({"mono", "mt", "artetxe", "barista"}));
  baseline_cmd
      ->add_option("--src-embeddings", baseline_args.src_embeddings, "source embedding text file")
      ->check(CLI::ExistingFile);
  baseline_cmd
      ->add_option("--tgt-embeddings", baseline_args.tgt_embeddings, "target embedding text file")
      ->check(CLI::ExistingFile);
  baseline_cmd->add_option("--lexicon", baseline_args.lexicon, "translation pair TSV")
      ->check(CLI::ExistingFile);
  baseline_cmd->add_option("--src-train", baseline_args.src_train, "source train TSV")
      ->check(CLI::ExistingFile);
  baseline_cmd->add_option("--src-dev", baseline_args.src_dev, "source dev TSV")
      ->check(CLI::ExistingFile);
  baseline_cmd->add_option("--src-test", baseline_args.src_test, "source test TSV")
      ->check(CLI::ExistingFile);
  baseline_cmd->add_option("--tgt-train", baseline_args.tgt_train, "target train TSV")
      ->check(CLI::ExistingFile);
  baseline_cmd->add_option("--tgt-dev", baseline_args.tgt_dev, "target dev TSV")
      ->check(CLI::ExistingFile);
  baseline_cmd->add_option("--tgt-test", baseline_args.tgt_test, "target test TSV")
      ->check(CLI::ExistingFile);
  baseline_cmd
      ->add_option("--mt-dev", baseline_args.mt_dev, "pre-translated target dev TSV")
      ->check(CLI::ExistingFile);
  baseline_cmd
      ->add_option("--mt-test", baseline_args.mt_test, "pre-translated target test TSV")
      ->check(CLI::ExistingFile);
  baseline_cmd->add_option("--scheme", baseline_args.scheme, "label scheme")
      ->check(CLI::IsMember({"binary", "4class"}))
      ->capture_default_str();
  baseline_cmd
      ->add_flag("--orthogonal", baseline_args.orthogonal,
                 "constrain the projection map to a rotation")
      ->capture_default_str();
  baseline_cmd->add_option("--sgns-dim", baseline_args.sgns_dim, "mixed embedding width")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  baseline_cmd->add_option("--sgns-window", baseline_args.sgns_window, "context window")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  baseline_cmd
      ->add_option("--sgns-negative", baseline_args.sgns_negative, "negative samples per pair")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  baseline_cmd->add_option("--sgns-epochs", baseline_args.sgns_epochs, "SGNS epochs")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  baseline_cmd->add_option("--sgns-lr", baseline_args.sgns_lr, "SGNS learning rate")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  baseline_cmd
      ->add_option("--sgns-subsample", baseline_args.sgns_subsample,
                   "frequent-token subsampling threshold; 0 disables")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  baseline_cmd
      ->add_option("--sgns-min-count", baseline_args.sgns_min_count, "vocabulary cutoff")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  baseline_cmd->add_option("--seed", baseline_args.seed, "RNG seed")->capture_default_str();
  baseline_cmd->add_option("--out", baseline_args.out, "output directory (required)");

  EnsembleArgs ensemble_args;
  CLI::App* ensemble_cmd = app.add_subcommand(
      "ensemble", "train a random forest over two systems' prediction files");
  add_config_file(ensemble_cmd, ensemble_args.config_file);
  ensemble_cmd->add_option("--pred-a", ensemble_args.pred_a, "prediction CSV of system A (required)")
      ->check(CLI::ExistingFile);
  ensemble_cmd->add_option("--pred-b", ensemble_args.pred_b, "prediction CSV of system B (required)")
      ->check(CLI::ExistingFile);
  ensemble_cmd->add_option("--trees", ensemble_args.trees, "forest size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  ensemble_cmd->add_option("--max-depth", ensemble_args.max_depth, "0 means unlimited")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  ensemble_cmd->add_option("--seed", ensemble_args.seed, "RNG seed")->capture_default_str();
  ensemble_cmd->add_option("--out", ensemble_args.out, "output directory (required)");

  ExperimentArgs experiment_args;
  CLI::App* experiment_cmd =
      app.add_subcommand("experiment", "lexicon sweep, projector ablation, cosine trace");
  add_config_file(experiment_cmd, experiment_args.config_file);
  experiment_cmd->add_option("kind", experiment_args.kind, "which experiment")
      ->required()
      ->check(CLI::IsMember({"lexicon-sweep", "ablate-mprime", "cosine-trace"}));
  experiment_cmd
      ->add_option("--src-embeddings", experiment_args.src_embeddings, "source embedding text file")
      ->check(CLI::ExistingFile);
  experiment_cmd
      ->add_option("--tgt-embeddings", experiment_args.tgt_embeddings, "target embedding text file")
      ->check(CLI::ExistingFile);
  experiment_cmd->add_option("--lexicon", experiment_args.lexicon, "translation pair TSV")
      ->check(CLI::ExistingFile);
  experiment_cmd->add_option("--src-train", experiment_args.src_train, "source train TSV")
      ->check(CLI::ExistingFile);
  experiment_cmd->add_option("--src-dev", experiment_args.src_dev, "source dev TSV")
      ->check(CLI::ExistingFile);
  experiment_cmd->add_option("--tgt-dev", experiment_args.tgt_dev, "target dev TSV")
      ->check(CLI::ExistingFile);
  experiment_cmd->add_option("--tgt-test", experiment_args.tgt_test, "target test TSV")
      ->check(CLI::ExistingFile);
  experiment_cmd
      ->add_option("--src-positive", experiment_args.src_positive,
                   "source positive word list, one token per line")
      ->check(CLI::ExistingFile);
  experiment_cmd
      ->add_option("--src-negative", experiment_args.src_negative, "source negative word list")
      ->check(CLI::ExistingFile);
  experiment_cmd
      ->add_option("--tgt-positive", experiment_args.tgt_positive, "target positive word list")
      ->check(CLI::ExistingFile);
  experiment_cmd
      ->add_option("--tgt-negative", experiment_args.tgt_negative, "target negative word list")
      ->check(CLI::ExistingFile);
  experiment_cmd->add_option("--scheme", experiment_args.scheme, "label scheme")
      ->check(CLI::IsMember({"binary", "4class"}))
      ->capture_default_str();
  add_train_hyper_options(experiment_cmd, experiment_args.alpha, experiment_args.epochs,
                          experiment_args.batch, experiment_args.lr,
                          experiment_args.joint_dim);
  experiment_cmd
      ->add_option("--lexicon-holdout", experiment_args.lexicon_holdout,
                   "held-out pair fraction for the cosine trace")
      ->check(CLI::Range(0.0, 0.9))
      ->capture_default_str();
  experiment_cmd
      ->add_option("--sizes", experiment_args.sizes, "comma list of pair budgets to sweep")
      ->delimiter(',');
  experiment_cmd->add_option("--seed", experiment_args.seed, "RNG seed")
      ->capture_default_str();
  experiment_cmd->add_option("--out", experiment_args.out, "output directory (required)");

  SynthArgs synth_args;
  CLI::App* synth_cmd = app.add_subcommand(
      "synth-generate", "generate a synthetic bilingual sentiment world");
  add_config_file(synth_cmd, synth_args.config_file);
  synth_cmd->add_option("--vocab", synth_args.config.vocab, "vocabulary size per language")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth_cmd->add_option("--dim", synth_args.config.dim, "embedding width")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth_cmd->add_option("--train", synth_args.config.train_sentences, "train sentences per language")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth_cmd->add_option("--dev", synth_args.config.dev_sentences, "dev sentences")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth_cmd->add_option("--test", synth_args.config.test_sentences, "test sentences")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth_cmd->add_option("--min-len", synth_args.config.min_len, "shortest sentence")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth_cmd->add_option("--max-len", synth_args.config.max_len, "longest sentence")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth_cmd->add_option("--classes", synth_args.config.classes, "2 or 4")
      ->check(CLI::IsMember({2, 4}))
      ->capture_default_str();
  synth_cmd->add_option("--noise-sigma", synth_args.config.noise_sigma, "target-side noise")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  synth_cmd
      ->add_option("--coverage", synth_args.config.lexicon_coverage,
                   "fraction of the vocabulary in the lexicon")
      ->capture_default_str();
  synth_cmd
      ->add_option("--polarity-bias", synth_args.config.polarity_bias,
                   "token sampling tilt toward the sentence polarity")
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth_args.config.seed, "RNG seed")->capture_default_str();
  synth_cmd->add_option("--out", synth_args.out, "output directory (required)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_cmd->parsed()) {
      apply_config_file(train_cmd, train_args.config_file);
      return run_train_command(train_args, *train_cmd);
    }
    if (eval_cmd->parsed()) {
      apply_config_file(eval_cmd, eval_args.config_file);
      return run_eval_command(eval_args, *eval_cmd);
    }
    if (baseline_cmd->parsed()) {
      apply_config_file(baseline_cmd, baseline_args.config_file);
      return run_baseline_command(baseline_args, *baseline_cmd);
    }
    if (ensemble_cmd->parsed()) {
      apply_config_file(ensemble_cmd, ensemble_args.config_file);
      return run_ensemble_command(ensemble_args, *ensemble_cmd);
    }
    if (experiment_cmd->parsed()) {
      apply_config_file(experiment_cmd, experiment_args.config_file);
      return run_experiment_command(experiment_args, *experiment_cmd);
    }
    if (synth_cmd->parsed()) {
      apply_config_file(synth_cmd, synth_args.config_file);
      return run_synth_command(synth_args, *synth_cmd);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
