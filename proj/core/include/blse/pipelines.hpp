#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "blse/corpus.hpp"
#include "blse/embeddings.hpp"
#include "blse/eval.hpp"
#include "blse/forest.hpp"
#include "blse/lexicon.hpp"
#include "blse/model.hpp"
#include "blse/projections.hpp"
#include "blse/sgns.hpp"
#include "blse/svm.hpp"

namespace blse {

// Sentence-average features for one split. Degenerate sentences keep their
// zero vector so every example still gets a prediction.
struct SplitFeatures {
  Eigen::MatrixXd X;
  std::vector<int> y;
};

SplitFeatures featurize(const EmbeddingStore& store, const LabeledCorpus& corpus,
                        Split split, bool drop_degenerate = false);

// Per-example class probabilities over the dev and test splits of the
// evaluation corpus, the exchange format between pipelines and the
// ensemble. CSV: "split,gold,p0,...,p{c-1}".
struct PredictionSet {
  int class_count = 0;
  std::vector<int> dev_gold;
  std::vector<int> test_gold;
  Eigen::MatrixXd dev_probs;
  Eigen::MatrixXd test_probs;
};

std::string predictions_to_csv(const PredictionSet& preds);
void save_predictions(const PredictionSet& preds, const std::string& path);
PredictionSet load_predictions(const std::string& path);

// The SVM-based pipelines (Mono, MT, the two projection baselines) share
// this result shape.
struct SvmPipelineResult {
  LinearSvm model;
  double chosen_c = 1.0;
  std::vector<std::pair<double, double>> c_grid;  // (C, dev macro F1)
  EvalReport test_report;
  std::vector<int> test_pred;
  PredictionSet predictions;
};

// Upper bound: train, tune and test inside one language.
SvmPipelineResult run_mono(const EmbeddingStore& store, const LabeledCorpus& corpus,
                           std::uint64_t seed);

// Machine-translation pipeline: a source-language classifier applied to
// pre-translated target text (both corpora live in the source vocabulary).
SvmPipelineResult run_mt(const EmbeddingStore& source_store,
                         const LabeledCorpus& source_corpus,
                         const LabeledCorpus& translated_target,
                         std::uint64_t seed);

// Least-squares projection baseline: fit W on the lexicon, train the SVM on
// projected source averages, tune C on the target dev split, test on the
// target test split.
SvmPipelineResult run_artetxe(const EmbeddingStore& S, const EmbeddingStore& T,
                              const BilingualLexicon& lexicon,
                              const LabeledCorpus& source_corpus,
                              const LabeledCorpus& target_corpus, bool orthogonal,
                              std::uint64_t seed, LinearMap* map_out = nullptr);

// Pseudo-bilingual corpus baseline: mix the corpora through the lexicon,
// train one shared embedding space on the mixture, then classify as in the
// other pipelines.
struct BaristaResult {
  SvmPipelineResult svm;
  LabeledCorpus pseudo_corpus;
  EmbeddingStore mixed_store;
};

BaristaResult run_barista(const LabeledCorpus& source_corpus,
                          const LabeledCorpus& target_corpus,
                          const BilingualLexicon& lexicon, const SgnsConfig& sgns,
                          std::uint64_t seed);

struct BlsePipelineConfig {
  TrainConfig train;
  // Fraction of lexicon pairs held out for cosine monitoring when the
  // lexicon does not already carry a dev mask.
  double lexicon_holdout = 0.1;
};

struct BlsePipelineResult {
  TrainResult trained;
  EvalReport source_dev_report;
  bool has_target = false;
  EvalReport target_dev_report;
  EvalReport target_test_report;
  std::vector<int> target_test_pred;
  PredictionSet predictions;  // target dev/test when a target corpus is given
};

BlsePipelineResult run_blse(const EmbeddingStore& S, const EmbeddingStore& T,
                            const BilingualLexicon& lexicon,
                            const LabeledCorpus& source_corpus,
                            const LabeledCorpus* target_corpus,
                            const BlsePipelineConfig& config,
                            const EpochObserver& observer = {});

// Meta-classifier over two systems' prediction sets: the forest trains on
// the dev rows and is scored on the test rows.
struct EnsembleResult {
  RandomForest forest;
  EvalReport test_report;
  std::vector<int> test_pred;
  PredictionSet predictions;  // forest probabilities over dev and test rows
};

EnsembleResult run_ensemble(const PredictionSet& a, const PredictionSet& b,
                            const ForestConfig& config);

// Translation-pair budget sweep: each point trains on the first `size`
// train pairs of the lexicon (0 trains without the projection term) with a
// seed derived per point.
struct SweepPoint {
  int pairs = 0;
  double src_dev_f1 = 0.0;
  double tgt_dev_f1 = 0.0;
  double tgt_test_f1 = 0.0;
};

std::vector<int> default_sweep_sizes();

std::vector<SweepPoint> lexicon_sweep(const EmbeddingStore& S, const EmbeddingStore& T,
                                      const BilingualLexicon& lexicon,
                                      const LabeledCorpus& source_corpus,
                                      const LabeledCorpus& target_corpus,
                                      const TrainConfig& base,
                                      std::span<const int> sizes);
std::string sweep_to_csv(std::span<const SweepPoint> points);

// Trains the full and the ablated variant under one protocol.
struct AblationOutcome {
  TrainResult full;
  TrainResult ablated;
};

AblationOutcome run_ablation(const EmbeddingStore& S, const EmbeddingStore& T,
                             const BilingualLexicon& lexicon,
                             const LabeledCorpus& source_corpus,
                             const LabeledCorpus& target_corpus,
                             const TrainConfig& base);
std::string ablation_to_csv(const AblationOutcome& outcome);

// Per-epoch joint-space geometry: mean cosine within and across polarity
// word sets per language, plus the held-out translation-pair mean.
struct CosineTraceRecord {
  int epoch = 0;
  double src_same_polarity = 0.0;
  double src_cross_polarity = 0.0;
  double tgt_same_polarity = 0.0;
  double tgt_cross_polarity = 0.0;
  double translation = 0.0;
};

struct CosineTraceResult {
  std::vector<CosineTraceRecord> records;
  TrainResult trained;
};

CosineTraceResult run_cosine_trace(const EmbeddingStore& S, const EmbeddingStore& T,
                                   const BilingualLexicon& lexicon,
                                   const LabeledCorpus& source_corpus,
                                   const LabeledCorpus* target_corpus,
                                   const BlsePipelineConfig& config,
                                   std::span<const std::string> source_positive,
                                   std::span<const std::string> source_negative,
                                   std::span<const std::string> target_positive,
                                   std::span<const std::string> target_negative);
std::string cosine_trace_to_csv(std::span<const CosineTraceRecord> records);

}  // namespace blse
