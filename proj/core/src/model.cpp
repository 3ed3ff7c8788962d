#include "blse/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "blse/eval.hpp"
#include "blse/rng.hpp"
#include "blse/util.hpp"

namespace blse {

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

void check_model(const BlseModel& model) {
  require(model.M.rows() > 0 && model.M.cols() > 0, "model: M is empty");
  require(model.P.rows() == model.M.cols(), "model: P rows do not match the joint dim");
  require(model.P.cols() == model.class_count, "model: P cols do not match the class count");
  if (!model.ablated) {
    require(model.Mprime.rows() > 0, "model: Mprime is empty on a non-ablated model");
    require(model.Mprime.cols() == model.M.cols(),
            "model: Mprime cols do not match the joint dim");
  }
}

// Row-wise softmax, numerically shifted.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double mx = logits.row(i).maxCoeff();
    Eigen::ArrayXd e = (logits.row(i).array() - mx).exp();
    out.row(i) = e / e.sum();
  }
  return out;
}

int argmax_lowest(const Eigen::VectorXd& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

// Gathers the covered rows of a lexicon batch into matrices. Pair tokens
// must exist in both stores.
void gather_pairs(const EmbeddingStore& S, const EmbeddingStore& T,
                  std::span<const TranslationPair> pairs, Eigen::MatrixXd& Sb,
                  Eigen::MatrixXd& Tb) {
  Sb.resize(static_cast<Eigen::Index>(pairs.size()), S.dim());
  Tb.resize(static_cast<Eigen::Index>(pairs.size()), T.dim());
  for (size_t i = 0; i < pairs.size(); ++i) {
    Sb.row(static_cast<Eigen::Index>(i)) = S.row(S.row_of(pairs[i].source));
    Tb.row(static_cast<Eigen::Index>(i)) = T.row(T.row_of(pairs[i].target));
  }
}

// Averages the non-degenerate sentences of a batch. Returns the rows kept.
Eigen::Index gather_sentences(const EmbeddingStore& S, std::span<const Example> batch,
                              Eigen::MatrixXd& A, std::vector<int>& labels) {
  A.resize(static_cast<Eigen::Index>(batch.size()), S.dim());
  labels.clear();
  Eigen::Index kept = 0;
  for (const Example& ex : batch) {
    SentenceVector sv = average_sentence(S, ex.tokens);
    if (sv.degenerate()) continue;
    A.row(kept++) = sv.values;
    labels.push_back(ex.label);
  }
  A.conservativeResize(kept, Eigen::NoChange);
  return kept;
}

struct LossParts {
  double projection = 0.0;
  double sentiment = 0.0;
};

// Shared loss/gradient core over pre-gathered batch matrices. Gradient
// output is optional; loss terms with an empty batch contribute zero.
LossParts loss_and_grads(const BlseModel& model, const Eigen::MatrixXd& A,
                         const std::vector<int>& labels, const Eigen::MatrixXd& Sb,
                         const Eigen::MatrixXd& Tb, double alpha, Gradients* grads) {
  LossParts parts;
  if (grads) {
    grads->M = Eigen::MatrixXd::Zero(model.M.rows(), model.M.cols());
    grads->Mprime = model.ablated
                        ? Eigen::MatrixXd()
                        : Eigen::MatrixXd::Zero(model.Mprime.rows(), model.Mprime.cols());
    grads->P = Eigen::MatrixXd::Zero(model.P.rows(), model.P.cols());
  }

  const Eigen::Index n = Sb.rows();
  if (n > 0) {
    Eigen::MatrixXd D = Sb * model.M;
    if (model.ablated)
      D -= Tb;
    else
      D -= Tb * model.Mprime;
    parts.projection = D.squaredNorm() / static_cast<double>(n);
    if (grads && alpha < 1.0) {
      const double scale = (1.0 - alpha) * 2.0 / static_cast<double>(n);
      grads->M.noalias() += scale * (Sb.transpose() * D);
      if (!model.ablated) grads->Mprime.noalias() -= scale * (Tb.transpose() * D);
    }
  }

  const Eigen::Index B = A.rows();
  if (B > 0) {
    Eigen::MatrixXd Z = A * model.M;  // B x k
    Eigen::MatrixXd probs = softmax_rows(Z * model.P);
    double ce = 0.0;
    for (Eigen::Index i = 0; i < B; ++i) {
      const double p = probs(i, labels[static_cast<size_t>(i)]);
      ce -= std::log(std::max(p, 1e-300));
    }
    parts.sentiment = ce / static_cast<double>(B);
    if (grads && alpha > 0.0) {
      Eigen::MatrixXd G = probs;
      for (Eigen::Index i = 0; i < B; ++i) G(i, labels[static_cast<size_t>(i)]) -= 1.0;
      G *= alpha / static_cast<double>(B);
      grads->P.noalias() += Z.transpose() * G;
      grads->M.noalias() += A.transpose() * (G * model.P.transpose());
    }
  }
  return parts;
}

double init_bound(Eigen::Index fan_in) { return 1.0 / std::sqrt(static_cast<double>(fan_in)); }

Eigen::MatrixXd init_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double b = init_bound(rows);
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = rng.uniform(-b, b);
  return out;
}

Prediction predict_from_average(const BlseModel& model, const SentenceVector& sv,
                                bool target_side) {
  Prediction pred;
  if (sv.degenerate()) {
    pred.degenerate = true;
    pred.label = model.majority_class;
    pred.probs = Eigen::VectorXd::Constant(model.class_count,
                                           1.0 / static_cast<double>(model.class_count));
    return pred;
  }
  Eigen::RowVectorXd z;
  if (!target_side)
    z = sv.values.transpose() * model.M;
  else if (model.ablated)
    z = sv.values.transpose();
  else
    z = sv.values.transpose() * model.Mprime;
  Eigen::RowVectorXd logits = z * model.P;
  const double mx = logits.maxCoeff();
  Eigen::ArrayXd e = (logits.array() - mx).exp().transpose();
  pred.probs = e / e.sum();
  pred.label = argmax_lowest(pred.probs);
  return pred;
}

}  // namespace

std::string trace_csv_header() {
  return "epoch,joint_loss,proj_loss,sent_loss,src_dev_f1,tgt_dev_f1,holdout_cos";
}

std::string trace_to_csv(const EpochTrace& trace) {
  std::string out = trace_csv_header();
  out += '\n';
  for (const EpochRecord& r : trace) {
    out += std::to_string(r.epoch);
    for (double v : {r.joint_loss, r.proj_loss, r.sent_loss, r.src_dev_f1, r.tgt_dev_f1,
                     r.holdout_cos}) {
      out += ',';
      out += format_g17(v);
    }
    out += '\n';
  }
  return out;
}

void save_trace_csv(const EpochTrace& trace, const std::string& path) {
  write_file(path, trace_to_csv(trace));
}

double projection_loss(const BlseModel& model, const EmbeddingStore& S,
                       const EmbeddingStore& T, std::span<const TranslationPair> pairs) {
  check_model(model);
  require(!pairs.empty(), "projection_loss: empty pair batch");
  Eigen::MatrixXd Sb, Tb;
  gather_pairs(S, T, pairs, Sb, Tb);
  return loss_and_grads(model, Eigen::MatrixXd(0, S.dim()), {}, Sb, Tb, 0.0, nullptr)
      .projection;
}

double sentiment_loss(const BlseModel& model, const EmbeddingStore& S,
                      std::span<const Example> batch) {
  check_model(model);
  require(!batch.empty(), "sentiment_loss: empty batch");
  Eigen::MatrixXd A;
  std::vector<int> labels;
  const Eigen::Index kept = gather_sentences(S, batch, A, labels);
  require(kept > 0, "sentiment_loss: every sentence in the batch is out of vocabulary");
  for (int y : labels)
    require(y >= 0 && y < model.class_count, "sentiment_loss: label out of range");
  return loss_and_grads(model, A, labels, Eigen::MatrixXd(0, S.dim()),
                        Eigen::MatrixXd(0, model.target_dim()), 1.0, nullptr)
      .sentiment;
}

double joint_loss(const BlseModel& model, const EmbeddingStore& S, const EmbeddingStore& T,
                  std::span<const Example> corpus_batch,
                  std::span<const TranslationPair> lexicon_batch, double alpha) {
  require(alpha >= 0.0 && alpha <= 1.0, "joint_loss: alpha outside [0,1]");
  const double sent =
      corpus_batch.empty() ? 0.0 : sentiment_loss(model, S, corpus_batch);
  const double proj =
      lexicon_batch.empty() ? 0.0 : projection_loss(model, S, T, lexicon_batch);
  return alpha * sent + (1.0 - alpha) * proj;
}

Gradients gradients(const BlseModel& model, const EmbeddingStore& S,
                    const EmbeddingStore& T, std::span<const Example> corpus_batch,
                    std::span<const TranslationPair> lexicon_batch, double alpha) {
  check_model(model);
  require(alpha >= 0.0 && alpha <= 1.0, "gradients: alpha outside [0,1]");
  Eigen::MatrixXd Sb(0, S.dim()), Tb(0, model.target_dim());
  if (!lexicon_batch.empty()) gather_pairs(S, T, lexicon_batch, Sb, Tb);
  Eigen::MatrixXd A(0, S.dim());
  std::vector<int> labels;
  if (!corpus_batch.empty()) {
    gather_sentences(S, corpus_batch, A, labels);
    for (int y : labels)
      require(y >= 0 && y < model.class_count, "gradients: label out of range");
  }
  Gradients g;
  loss_and_grads(model, A, labels, Sb, Tb, alpha, &g);
  return g;
}

AdamState AdamState::like(const Eigen::MatrixXd& params) {
  AdamState s;
  s.m = Eigen::MatrixXd::Zero(params.rows(), params.cols());
  s.v = Eigen::MatrixXd::Zero(params.rows(), params.cols());
  return s;
}

void adam_step(AdamState& state, Eigen::MatrixXd& params, const Eigen::MatrixXd& grad,
               double learning_rate) {
  require(grad.rows() == params.rows() && grad.cols() == params.cols(),
          "adam_step: gradient shape does not match the parameters");
  require(grad.allFinite(), "adam_step: non-finite gradient");
  state.step += 1;
  state.m = kAdamBeta1 * state.m + (1.0 - kAdamBeta1) * grad;
  state.v = kAdamBeta2 * state.v.array().matrix() +
            (1.0 - kAdamBeta2) * grad.array().square().matrix();
  const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.step));
  Eigen::ArrayXXd mhat = state.m.array() / c1;
  Eigen::ArrayXXd vhat = state.v.array() / c2;
  params.array() -= learning_rate * mhat / (vhat.sqrt() + kAdamEps);
}

TrainResult train(const EmbeddingStore& S, const EmbeddingStore& T,
                  const BilingualLexicon& lexicon, const LabeledCorpus& corpus,
                  const TrainConfig& config, const LabeledCorpus* target_dev,
                  const EpochObserver& observer) {
  require(config.alpha >= 0.0 && config.alpha <= 1.0, "train: alpha outside [0,1]");
  require(config.epochs >= 1, "train: epochs must be >= 1");
  require(config.batch_size >= 1, "train: batch_size must be >= 1");
  require(config.learning_rate > 0.0, "train: learning_rate must be positive");

  const int c = corpus.class_count();
  const Eigen::Index d = S.dim();
  const Eigen::Index dprime = T.dim();
  Eigen::Index k = config.joint_dim > 0 ? config.joint_dim
                                        : (config.ablate_mprime ? dprime : d);
  require(!config.ablate_mprime || k == dprime,
          "train: the ablated variant needs joint_dim == target dim");

  TrainResult result;

  // Train-side lexicon pairs covered by both stores.
  std::vector<TranslationPair> pairs;
  for (const TranslationPair& p : lexicon.train_pairs()) {
    if (S.contains(p.source) && T.contains(p.target))
      pairs.push_back(p);
    else
      ++result.dropped_uncovered_pairs;
  }
  require(!pairs.empty() || config.allow_empty_lexicon,
          "train: no lexicon pair is covered by both embedding stores");
  Eigen::MatrixXd pair_src, pair_tgt;
  gather_pairs(S, T, pairs, pair_src, pair_tgt);

  // Held-out pairs, watched but never trained on.
  std::vector<TranslationPair> holdout;
  for (const TranslationPair& p : lexicon.dev_pairs())
    if (S.contains(p.source) && T.contains(p.target)) holdout.push_back(p);
  Eigen::MatrixXd hold_src, hold_tgt;
  gather_pairs(S, T, holdout, hold_src, hold_tgt);

  // Training sentences; degenerate ones carry no signal and are dropped.
  std::vector<Eigen::RowVectorXd> train_rows;
  std::vector<int> train_labels;
  for (size_t idx : corpus.split_indices(Split::Train)) {
    const Example& ex = corpus.examples[idx];
    SentenceVector sv = average_sentence(S, ex.tokens);
    if (sv.degenerate()) {
      ++result.dropped_degenerate_examples;
      continue;
    }
    train_rows.push_back(sv.values.transpose());
    train_labels.push_back(ex.label);
  }
  require(!train_rows.empty(), "train: the train split has no in-vocabulary sentence");
  const size_t N = train_rows.size();
  Eigen::MatrixXd A_train(static_cast<Eigen::Index>(N), d);
  for (size_t i = 0; i < N; ++i) A_train.row(static_cast<Eigen::Index>(i)) = train_rows[i];

  std::vector<int> counts(static_cast<size_t>(c), 0);
  for (int y : train_labels) ++counts[static_cast<size_t>(y)];
  int majority = 0;
  for (int i = 1; i < c; ++i)
    if (counts[static_cast<size_t>(i)] > counts[static_cast<size_t>(majority)]) majority = i;

  // Dev sentences stay as token lists so prediction sees the same path as
  // inference, degenerate fallback included.
  std::vector<const Example*> src_dev;
  for (size_t idx : corpus.split_indices(Split::Dev)) src_dev.push_back(&corpus.examples[idx]);
  std::vector<const Example*> tgt_dev;
  if (target_dev) {
    require(target_dev->class_count() == c,
            "train: target dev corpus has a different class count");
    for (const Example& ex : target_dev->examples)
      if (ex.split == Split::Dev) tgt_dev.push_back(&ex);
    if (tgt_dev.empty())
      for (const Example& ex : target_dev->examples) tgt_dev.push_back(&ex);
  }

  Rng rng(config.seed);
  BlseModel model;
  model.class_count = c;
  model.ablated = config.ablate_mprime;
  model.majority_class = majority;
  model.M = init_matrix(d, k, rng);
  if (!model.ablated) model.Mprime = init_matrix(dprime, k, rng);
  model.P = init_matrix(k, c, rng);

  AdamState adam_M = AdamState::like(model.M);
  AdamState adam_Mp;
  if (!model.ablated) adam_Mp = AdamState::like(model.Mprime);
  AdamState adam_P = AdamState::like(model.P);

  const size_t n_pairs = pairs.size();
  const size_t batch = static_cast<size_t>(config.batch_size);

  auto dev_f1 = [&](const std::vector<const Example*>& dev, bool target_side) {
    if (dev.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::vector<int> gold, pred;
    gold.reserve(dev.size());
    pred.reserve(dev.size());
    for (const Example* ex : dev) {
      gold.push_back(ex->label);
      Prediction p = target_side ? predict_target(model, T, ex->tokens)
                                 : predict_source(model, S, ex->tokens);
      pred.push_back(p.label);
    }
    return macro_f1(gold, pred, c);
  };

  auto holdout_cos = [&]() {
    if (holdout.empty()) return std::numeric_limits<double>::quiet_NaN();
    Eigen::MatrixXd zs = hold_src * model.M;
    Eigen::MatrixXd zt = model.ablated ? hold_tgt : Eigen::MatrixXd(hold_tgt * model.Mprime);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < zs.rows(); ++i)
      sum += cosine(zs.row(i).transpose(), zt.row(i).transpose());
    return sum / static_cast<double>(zs.rows());
  };

  BlseModel best = model;
  int best_epoch = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  const bool select_on_target = !tgt_dev.empty();
  const bool selectable = select_on_target || !src_dev.empty();

  std::vector<size_t> lex_order(n_pairs);
  for (size_t i = 0; i < n_pairs; ++i) lex_order[i] = i;
  size_t lex_cursor = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::vector<size_t> order = shuffled_indices(N, rng);
    if (n_pairs > 0) rng.shuffle(lex_order);

    double sum_joint = 0.0, sum_proj = 0.0, sum_sent = 0.0;
    size_t steps = 0;

    for (size_t start = 0; start < N; start += batch) {
      const size_t stop = std::min(start + batch, N);
      const Eigen::Index bs = static_cast<Eigen::Index>(stop - start);

      Eigen::MatrixXd A(bs, d);
      std::vector<int> labels(static_cast<size_t>(bs));
      for (Eigen::Index i = 0; i < bs; ++i) {
        const size_t src = order[start + static_cast<size_t>(i)];
        A.row(i) = A_train.row(static_cast<Eigen::Index>(src));
        labels[static_cast<size_t>(i)] = train_labels[src];
      }

      Eigen::MatrixXd Sb(0, d), Tb(0, dprime);
      if (n_pairs > 0) {
        Sb.resize(bs, d);
        Tb.resize(bs, dprime);
        for (Eigen::Index i = 0; i < bs; ++i) {
          const size_t row = lex_order[lex_cursor];
          Sb.row(i) = pair_src.row(static_cast<Eigen::Index>(row));
          Tb.row(i) = pair_tgt.row(static_cast<Eigen::Index>(row));
          lex_cursor = (lex_cursor + 1) % n_pairs;
        }
      }

      Gradients g;
      LossParts parts = loss_and_grads(model, A, labels, Sb, Tb, config.alpha, &g);
      const double joint =
          config.alpha * parts.sentiment + (1.0 - config.alpha) * parts.projection;
      require(std::isfinite(joint), "train: loss diverged to a non-finite value");

      adam_step(adam_M, model.M, g.M, config.learning_rate);
      if (!model.ablated) adam_step(adam_Mp, model.Mprime, g.Mprime, config.learning_rate);
      adam_step(adam_P, model.P, g.P, config.learning_rate);

      sum_joint += joint;
      sum_proj += parts.projection;
      sum_sent += parts.sentiment;
      ++steps;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.joint_loss = sum_joint / static_cast<double>(steps);
    rec.proj_loss = sum_proj / static_cast<double>(steps);
    rec.sent_loss = sum_sent / static_cast<double>(steps);
    rec.src_dev_f1 = dev_f1(src_dev, false);
    rec.tgt_dev_f1 = dev_f1(tgt_dev, true);
    rec.holdout_cos = holdout_cos();
    result.trace.push_back(rec);

    if (observer) observer(epoch, model);

    const double score = select_on_target ? rec.tgt_dev_f1 : rec.src_dev_f1;
    if (selectable && score > best_score) {
      best_score = score;
      best = model;
      best_epoch = epoch;
    }
  }

  if (!selectable || best_epoch == 0) {
    best = model;
    best_epoch = config.epochs;
  }
  result.model = std::move(best);
  result.best_epoch = best_epoch;
  return result;
}

Prediction predict_source(const BlseModel& model, const EmbeddingStore& S,
                          std::span<const std::string> tokens) {
  check_model(model);
  require(S.dim() == model.source_dim(), "predict_source: store dim does not match M");
  return predict_from_average(model, average_sentence(S, tokens), false);
}

Prediction predict_target(const BlseModel& model, const EmbeddingStore& T,
                          std::span<const std::string> tokens) {
  check_model(model);
  require(T.dim() == model.target_dim(), "predict_target: store dim does not match the model");
  return predict_from_average(model, average_sentence(T, tokens), true);
}

void save_model(const BlseModel& model, const std::string& path) {
  check_model(model);
  std::string out = "BLSE 1 " + std::to_string(model.M.rows()) + ' ' +
                    std::to_string(model.target_dim()) + ' ' +
                    std::to_string(model.M.cols()) + ' ' +
                    std::to_string(model.class_count) + ' ' +
                    (model.ablated ? std::string("1") : std::string("0")) + '\n';
  auto append = [&out](const Eigen::MatrixXd& mat) {
    for (Eigen::Index r = 0; r < mat.rows(); ++r) {
      for (Eigen::Index c = 0; c < mat.cols(); ++c) {
        if (c) out += ' ';
        out += format_g17(mat(r, c));
      }
      out += '\n';
    }
  };
  append(model.M);
  if (!model.ablated) append(model.Mprime);
  append(model.P);
  write_file(path, out);
}

BlseModel load_model(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "model file: empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto head = split_whitespace(line);
  require(head.size() == 7 && head[0] == "BLSE" && head[1] == "1",
          "model file: bad header, expected 'BLSE 1 <d> <dprime> <k> <c> <ablate>'");
  long long d = 0, dprime = 0, k = 0, c = 0, ablate = 0;
  require(try_parse_long(head[2], d) && try_parse_long(head[3], dprime) &&
              try_parse_long(head[4], k) && try_parse_long(head[5], c) &&
              try_parse_long(head[6], ablate),
          "model file: non-numeric header field");
  require(d > 0 && dprime > 0 && k > 0 && c > 1, "model file: non-positive dimensions");
  require(ablate == 0 || ablate == 1, "model file: ablate flag must be 0 or 1");
  require(ablate == 0 || dprime == k, "model file: ablated header needs dprime == k");

  BlseModel model;
  model.class_count = static_cast<int>(c);
  model.ablated = ablate == 1;

  auto read_matrix = [&](Eigen::Index rows, Eigen::Index cols, const char* what) {
    Eigen::MatrixXd mat(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      require(static_cast<bool>(std::getline(in, line)),
              std::string("model file: truncated ") + what);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      auto fields = split_whitespace(line);
      require(static_cast<Eigen::Index>(fields.size()) == cols,
              std::string("model file: wrong column count in ") + what);
      for (Eigen::Index cc = 0; cc < cols; ++cc) {
        double v = 0.0;
        require(try_parse_double(fields[static_cast<size_t>(cc)], v),
                std::string("model file: non-numeric value in ") + what);
        mat(r, cc) = v;
      }
    }
    require(mat.allFinite(), std::string("model file: non-finite value in ") + what);
    return mat;
  };

  model.M = read_matrix(d, k, "M");
  if (!model.ablated) model.Mprime = read_matrix(dprime, k, "Mprime");
  model.P = read_matrix(k, c, "P");
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    require(split_whitespace(line).empty(), "model file: trailing data");
  }
  return model;
}

}  // namespace blse
