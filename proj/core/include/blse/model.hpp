#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "blse/corpus.hpp"
#include "blse/embeddings.hpp"
#include "blse/lexicon.hpp"

namespace blse {

// Joint bilingual sentiment model: M maps the source space into the joint
// space, Mprime maps the target space into it, P is the softmax layer on top.
// The ablated variant drops Mprime; M then projects straight into the target
// space (joint dim == target dim) and target sentences meet P unprojected.
struct BlseModel {
  Eigen::MatrixXd M;       // d x k
  Eigen::MatrixXd Mprime;  // d' x k; 0x0 when ablated
  Eigen::MatrixXd P;       // k x c
  int class_count = 2;
  bool ablated = false;
  // Degenerate (all-OOV) sentences are classified as this label. Filled by
  // train(); the text format does not carry it, so loads default to 0.
  int majority_class = 0;

  Eigen::Index source_dim() const { return M.rows(); }
  Eigen::Index joint_dim() const { return M.cols(); }
  Eigen::Index target_dim() const { return ablated ? M.cols() : Mprime.rows(); }
};

struct TrainConfig {
  double alpha = 0.3;  // weight of the sentiment term; 1-alpha on projection
  int epochs = 200;
  int batch_size = 50;
  double learning_rate = 0.003;
  std::uint64_t seed = 1;
  bool ablate_mprime = false;
  int joint_dim = 0;  // 0 defaults to the source dim (target dim when ablated)
  // The lexicon-size sweep trains its zero-pair point with the projection
  // term absent; everything else should keep the coverage check.
  bool allow_empty_lexicon = false;
};

struct EpochRecord {
  int epoch = 0;
  double joint_loss = 0.0;
  double proj_loss = 0.0;
  double sent_loss = 0.0;
  double src_dev_f1 = 0.0;
  double tgt_dev_f1 = 0.0;
  double holdout_cos = 0.0;
};
using EpochTrace = std::vector<EpochRecord>;

std::string trace_csv_header();
std::string trace_to_csv(const EpochTrace& trace);
void save_trace_csv(const EpochTrace& trace, const std::string& path);

struct Gradients {
  Eigen::MatrixXd M;
  Eigen::MatrixXd Mprime;  // 0x0 when ablated
  Eigen::MatrixXd P;
};

// Mean squared Euclidean distance between projected translation pairs.
// Every pair token must be present in its store; callers pre-filter.
double projection_loss(const BlseModel& model, const EmbeddingStore& S,
                       const EmbeddingStore& T,
                       std::span<const TranslationPair> pairs);

// Mean categorical cross-entropy of softmax(avg * M * P) over the batch.
// Degenerate sentences are excluded from the mean.
double sentiment_loss(const BlseModel& model, const EmbeddingStore& S,
                      std::span<const Example> batch);

double joint_loss(const BlseModel& model, const EmbeddingStore& S,
                  const EmbeddingStore& T, std::span<const Example> corpus_batch,
                  std::span<const TranslationPair> lexicon_batch, double alpha);

// Analytic gradients of the batch-averaged joint loss. The embedding stores
// receive no gradient.
Gradients gradients(const BlseModel& model, const EmbeddingStore& S,
                    const EmbeddingStore& T, std::span<const Example> corpus_batch,
                    std::span<const TranslationPair> lexicon_batch, double alpha);

struct AdamState {
  Eigen::MatrixXd m;
  Eigen::MatrixXd v;
  long long step = 0;

  static AdamState like(const Eigen::MatrixXd& params);
};

// One ADAM update (beta1 0.9, beta2 0.999, eps 1e-8, bias correction).
// Aborts on non-finite gradients.
void adam_step(AdamState& state, Eigen::MatrixXd& params,
               const Eigen::MatrixXd& grad, double learning_rate);

using EpochObserver = std::function<void(int epoch, const BlseModel& model)>;

struct TrainResult {
  BlseModel model;  // parameters of the best epoch
  EpochTrace trace;
  int best_epoch = 0;
  int dropped_uncovered_pairs = 0;
  int dropped_degenerate_examples = 0;
};

// Joint minibatch training. Per corpus minibatch an equally sized lexicon
// minibatch is drawn with wraparound; M, Mprime, P are ADAM-updated against
// the alpha-weighted objective. Dev pairs of the lexicon are never trained
// on; they feed the holdout cosine column. Model selection: best epoch by
// target dev F1 when target_dev is given, else by source dev F1.
TrainResult train(const EmbeddingStore& S, const EmbeddingStore& T,
                  const BilingualLexicon& lexicon, const LabeledCorpus& corpus,
                  const TrainConfig& config,
                  const LabeledCorpus* target_dev = nullptr,
                  const EpochObserver& observer = {});

struct Prediction {
  Eigen::VectorXd probs;
  bool degenerate = false;
  int label = 0;
};

Prediction predict_source(const BlseModel& model, const EmbeddingStore& S,
                          std::span<const std::string> tokens);
Prediction predict_target(const BlseModel& model, const EmbeddingStore& T,
                          std::span<const std::string> tokens);

// Text format: "BLSE 1 <d> <dprime> <k> <c> <ablate:0|1>" then M, Mprime, P
// row-major, one row per line, 17 significant digits. Ablated models carry
// no Mprime rows.
void save_model(const BlseModel& model, const std::string& path);
BlseModel load_model(const std::string& path);

}  // namespace blse
