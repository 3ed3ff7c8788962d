#include "blse/pipelines.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "blse/rng.hpp"
#include "blse/util.hpp"

namespace blse {

namespace {

// Gold labels, argmax predictions and probabilities of one corpus split.
struct SplitPredictions {
  std::vector<int> gold;
  std::vector<int> pred;
  Eigen::MatrixXd probs;
};

SplitPredictions predict_split(const BlseModel& model, const EmbeddingStore& store,
                               const LabeledCorpus& corpus, Split split,
                               bool target_side) {
  SplitPredictions out;
  const auto indices = corpus.split_indices(split);
  out.probs.resize(static_cast<Eigen::Index>(indices.size()), model.class_count);
  Eigen::Index row = 0;
  for (size_t idx : indices) {
    const Example& ex = corpus.examples[idx];
    Prediction p = target_side ? predict_target(model, store, ex.tokens)
                               : predict_source(model, store, ex.tokens);
    out.gold.push_back(ex.label);
    out.pred.push_back(p.label);
    out.probs.row(row++) = p.probs.transpose();
  }
  return out;
}

SvmPipelineResult svm_pipeline(const SplitFeatures& train, const SplitFeatures& dev,
                               const SplitFeatures& test, int class_count,
                               std::uint64_t seed) {
  require(train.X.rows() > 0, "pipeline: empty training features");
  require(dev.X.rows() > 0, "pipeline: empty dev features");
  require(test.X.rows() > 0, "pipeline: empty test features");

  std::vector<std::pair<double, double>> grid;
  const double best_c =
      tune_svm_c(train.X, train.y, dev.X, dev.y, class_count, seed, 30, &grid);
  LinearSvm model = svm_train(train.X, train.y, best_c, seed, class_count);

  SvmPipelineResult result;
  result.chosen_c = best_c;
  result.c_grid = std::move(grid);
  result.test_pred = svm_predict(model, test.X);
  result.test_report = score(test.y, result.test_pred, class_count);
  result.predictions.class_count = class_count;
  result.predictions.dev_gold = dev.y;
  result.predictions.test_gold = test.y;
  result.predictions.dev_probs = svm_probabilities(model, dev.X);
  result.predictions.test_probs = svm_probabilities(model, test.X);
  result.model = std::move(model);
  return result;
}

BilingualLexicon with_holdout(const BilingualLexicon& lexicon, double fraction,
                              std::uint64_t seed) {
  const bool has_mask =
      std::any_of(lexicon.dev_mask.begin(), lexicon.dev_mask.end(), [](bool b) { return b; });
  if (has_mask || fraction <= 0.0 || lexicon.pairs.size() < 2) return lexicon;
  return split_dev(lexicon, fraction, seed);
}

double weighted_same_polarity(const Eigen::MatrixXd& pos, const Eigen::MatrixXd& neg) {
  const double np = static_cast<double>(pos.rows() * (pos.rows() - 1) / 2);
  const double nn = static_cast<double>(neg.rows() * (neg.rows() - 1) / 2);
  return (np * mean_pairwise_cosine(pos) + nn * mean_pairwise_cosine(neg)) / (np + nn);
}

Eigen::MatrixXd gather_rows(const EmbeddingStore& store,
                            std::span<const std::string> words, const char* what) {
  std::vector<Eigen::Index> rows;
  for (const std::string& w : words)
    if (auto idx = store.find(w)) rows.push_back(*idx);
  require(rows.size() >= 2,
          std::string("cosine trace: fewer than two ") + what + " words are in the store");
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), store.dim());
  for (size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = store.row(rows[i]);
  return out;
}

}  // namespace

SplitFeatures featurize(const EmbeddingStore& store, const LabeledCorpus& corpus,
                        Split split, bool drop_degenerate) {
  const auto indices = corpus.split_indices(split);
  SplitFeatures out;
  out.X.resize(static_cast<Eigen::Index>(indices.size()), store.dim());
  Eigen::Index row = 0;
  for (size_t idx : indices) {
    const Example& ex = corpus.examples[idx];
    SentenceVector sv = average_sentence(store, ex.tokens);
    if (sv.degenerate() && drop_degenerate) continue;
    out.X.row(row++) = sv.values.transpose();
    out.y.push_back(ex.label);
  }
  out.X.conservativeResize(row, Eigen::NoChange);
  return out;
}

std::string predictions_to_csv(const PredictionSet& preds) {
  std::string out = "split,gold";
  for (int c = 0; c < preds.class_count; ++c) out += ",p" + std::to_string(c);
  out += '\n';
  auto emit = [&](const char* tag, const std::vector<int>& gold,
                  const Eigen::MatrixXd& probs) {
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
      out += tag;
      out += ',';
      out += std::to_string(gold[static_cast<size_t>(i)]);
      for (Eigen::Index c = 0; c < probs.cols(); ++c) {
        out += ',';
        out += format_g17(probs(i, c));
      }
      out += '\n';
    }
  };
  emit("dev", preds.dev_gold, preds.dev_probs);
  emit("test", preds.test_gold, preds.test_probs);
  return out;
}

void save_predictions(const PredictionSet& preds, const std::string& path) {
  require(preds.dev_probs.rows() == static_cast<Eigen::Index>(preds.dev_gold.size()) &&
              preds.test_probs.rows() == static_cast<Eigen::Index>(preds.test_gold.size()),
          "predictions: row/label count mismatch");
  write_file(path, predictions_to_csv(preds));
}

PredictionSet load_predictions(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "predictions file: empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::istringstream hs(line);
    std::string field;
    while (std::getline(hs, field, ',')) header.push_back(field);
  }
  require(header.size() >= 4 && header[0] == "split" && header[1] == "gold",
          "predictions file: bad header, expected 'split,gold,p0,...'");
  const int c = static_cast<int>(header.size()) - 2;
  for (int i = 0; i < c; ++i)
    require(header[static_cast<size_t>(i) + 2] == "p" + std::to_string(i),
            "predictions file: bad probability column name");

  PredictionSet preds;
  preds.class_count = c;
  std::vector<Eigen::RowVectorXd> dev_rows, test_rows;
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    require(fields.size() == header.size(),
            "predictions file: wrong field count on line " + std::to_string(lineno));
    const bool is_dev = fields[0] == "dev";
    require(is_dev || fields[0] == "test",
            "predictions file: split must be dev or test on line " + std::to_string(lineno));
    long long gold = 0;
    require(try_parse_long(fields[1], gold) && gold >= 0 && gold < c,
            "predictions file: bad gold label on line " + std::to_string(lineno));
    Eigen::RowVectorXd row(c);
    for (int i = 0; i < c; ++i) {
      double v = 0.0;
      require(try_parse_double(fields[static_cast<size_t>(i) + 2], v) && v >= 0.0,
              "predictions file: bad probability on line " + std::to_string(lineno));
      row[i] = v;
    }
    if (is_dev) {
      preds.dev_gold.push_back(static_cast<int>(gold));
      dev_rows.push_back(std::move(row));
    } else {
      preds.test_gold.push_back(static_cast<int>(gold));
      test_rows.push_back(std::move(row));
    }
  }
  auto stack = [c](const std::vector<Eigen::RowVectorXd>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), c);
    for (size_t i = 0; i < rows.size(); ++i)
      out.row(static_cast<Eigen::Index>(i)) = rows[i];
    return out;
  };
  preds.dev_probs = stack(dev_rows);
  preds.test_probs = stack(test_rows);
  return preds;
}

SvmPipelineResult run_mono(const EmbeddingStore& store, const LabeledCorpus& corpus,
                           std::uint64_t seed) {
  return svm_pipeline(featurize(store, corpus, Split::Train, true),
                      featurize(store, corpus, Split::Dev),
                      featurize(store, corpus, Split::Test), corpus.class_count(), seed);
}

SvmPipelineResult run_mt(const EmbeddingStore& source_store,
                         const LabeledCorpus& source_corpus,
                         const LabeledCorpus& translated_target, std::uint64_t seed) {
  require(source_corpus.scheme == translated_target.scheme,
          "mt pipeline: label schemes differ");
  return svm_pipeline(featurize(source_store, source_corpus, Split::Train, true),
                      featurize(source_store, translated_target, Split::Dev),
                      featurize(source_store, translated_target, Split::Test),
                      source_corpus.class_count(), seed);
}

SvmPipelineResult run_artetxe(const EmbeddingStore& S, const EmbeddingStore& T,
                              const BilingualLexicon& lexicon,
                              const LabeledCorpus& source_corpus,
                              const LabeledCorpus& target_corpus, bool orthogonal,
                              std::uint64_t seed, LinearMap* map_out) {
  require(source_corpus.scheme == target_corpus.scheme,
          "projection pipeline: label schemes differ");
  LinearMap map = solve_least_squares_map(S, T, lexicon.train_pairs(), orthogonal);
  EmbeddingStore projected = project_source(S, map);
  if (map_out) *map_out = map;
  return svm_pipeline(featurize(projected, source_corpus, Split::Train, true),
                      featurize(T, target_corpus, Split::Dev),
                      featurize(T, target_corpus, Split::Test),
                      source_corpus.class_count(), seed);
}

BaristaResult run_barista(const LabeledCorpus& source_corpus,
                          const LabeledCorpus& target_corpus,
                          const BilingualLexicon& lexicon, const SgnsConfig& sgns,
                          std::uint64_t seed) {
  require(source_corpus.scheme == target_corpus.scheme,
          "barista pipeline: label schemes differ");
  LabeledCorpus pseudo = make_pseudo_bilingual(source_corpus, target_corpus, lexicon, seed);
  std::vector<std::vector<std::string>> sentences;
  sentences.reserve(pseudo.examples.size());
  for (const Example& ex : pseudo.examples) sentences.push_back(ex.tokens);
  EmbeddingStore mixed = train_sgns(sentences, sgns);

  SvmPipelineResult svm = svm_pipeline(
      featurize(mixed, source_corpus, Split::Train, true),
      featurize(mixed, target_corpus, Split::Dev),
      featurize(mixed, target_corpus, Split::Test), source_corpus.class_count(), seed);
  return BaristaResult{std::move(svm), std::move(pseudo), std::move(mixed)};
}

BlsePipelineResult run_blse(const EmbeddingStore& S, const EmbeddingStore& T,
                            const BilingualLexicon& lexicon,
                            const LabeledCorpus& source_corpus,
                            const LabeledCorpus* target_corpus,
                            const BlsePipelineConfig& config,
                            const EpochObserver& observer) {
  BilingualLexicon lex = with_holdout(lexicon, config.lexicon_holdout, config.train.seed);
  TrainResult trained =
      train(S, T, lex, source_corpus, config.train, target_corpus, observer);

  BlsePipelineResult result;
  SplitPredictions src_dev =
      predict_split(trained.model, S, source_corpus, Split::Dev, false);
  if (!src_dev.gold.empty())
    result.source_dev_report =
        score(src_dev.gold, src_dev.pred, source_corpus.class_count());

  if (target_corpus) {
    require(target_corpus->scheme == source_corpus.scheme,
            "blse pipeline: label schemes differ");
    result.has_target = true;
    SplitPredictions dev =
        predict_split(trained.model, T, *target_corpus, Split::Dev, true);
    SplitPredictions test =
        predict_split(trained.model, T, *target_corpus, Split::Test, true);
    if (!dev.gold.empty())
      result.target_dev_report = score(dev.gold, dev.pred, target_corpus->class_count());
    if (!test.gold.empty())
      result.target_test_report =
          score(test.gold, test.pred, target_corpus->class_count());
    result.target_test_pred = test.pred;
    result.predictions.class_count = target_corpus->class_count();
    result.predictions.dev_gold = std::move(dev.gold);
    result.predictions.test_gold = std::move(test.gold);
    result.predictions.dev_probs = std::move(dev.probs);
    result.predictions.test_probs = std::move(test.probs);
  }
  result.trained = std::move(trained);
  return result;
}

EnsembleResult run_ensemble(const PredictionSet& a, const PredictionSet& b,
                            const ForestConfig& config) {
  require(a.class_count == b.class_count, "ensemble: class counts differ");
  require(a.dev_gold == b.dev_gold,
          "ensemble: dev gold labels differ, the files describe different data");
  require(a.test_gold == b.test_gold,
          "ensemble: test gold labels differ, the files describe different data");
  require(!a.dev_gold.empty(), "ensemble: no dev rows to train on");
  require(!a.test_gold.empty(), "ensemble: no test rows to score");

  const int c = a.class_count;
  auto join = [c](const Eigen::MatrixXd& lhs, const Eigen::MatrixXd& rhs) {
    Eigen::MatrixXd out(lhs.rows(), 2 * c);
    out.leftCols(c) = lhs;
    out.rightCols(c) = rhs;
    return out;
  };
  Eigen::MatrixXd dev = join(a.dev_probs, b.dev_probs);
  Eigen::MatrixXd test = join(a.test_probs, b.test_probs);

  EnsembleResult result;
  result.forest = forest_train(dev, a.dev_gold, config, c);
  result.test_pred = forest_predict(result.forest, test);
  result.test_report = score(a.test_gold, result.test_pred, c);
  result.predictions.class_count = c;
  result.predictions.dev_gold = a.dev_gold;
  result.predictions.test_gold = a.test_gold;
  result.predictions.dev_probs = forest_probabilities(result.forest, dev);
  result.predictions.test_probs = forest_probabilities(result.forest, test);
  return result;
}

std::vector<int> default_sweep_sizes() {
  return {0, 100, 300, 600, 1000, 3000, 6000, 10000, 20000};
}

std::vector<SweepPoint> lexicon_sweep(const EmbeddingStore& S, const EmbeddingStore& T,
                                      const BilingualLexicon& lexicon,
                                      const LabeledCorpus& source_corpus,
                                      const LabeledCorpus& target_corpus,
                                      const TrainConfig& base,
                                      std::span<const int> sizes) {
  const std::vector<TranslationPair> all_pairs = lexicon.train_pairs();
  const Rng master(base.seed);
  std::vector<SweepPoint> points;
  for (size_t i = 0; i < sizes.size(); ++i) {
    const int size = sizes[i];
    require(size >= 0, "lexicon sweep: negative size");
    if (static_cast<size_t>(size) > all_pairs.size()) continue;  // capped by availability

    BilingualLexicon sub;
    sub.pairs.assign(all_pairs.begin(), all_pairs.begin() + size);
    sub.dev_mask.assign(sub.pairs.size(), false);

    TrainConfig cfg = base;
    cfg.seed = master.derive(static_cast<std::uint64_t>(i)).seed();
    cfg.allow_empty_lexicon = size == 0;
    TrainResult trained = train(S, T, sub, source_corpus, cfg, &target_corpus);

    const EpochRecord& best =
        trained.trace[static_cast<size_t>(trained.best_epoch - 1)];
    SplitPredictions test =
        predict_split(trained.model, T, target_corpus, Split::Test, true);
    SweepPoint point;
    point.pairs = size;
    point.src_dev_f1 = best.src_dev_f1;
    point.tgt_dev_f1 = best.tgt_dev_f1;
    point.tgt_test_f1 = test.gold.empty()
                            ? std::numeric_limits<double>::quiet_NaN()
                            : macro_f1(test.gold, test.pred, target_corpus.class_count());
    points.push_back(point);
  }
  require(!points.empty(), "lexicon sweep: no size fits the lexicon");
  return points;
}

std::string sweep_to_csv(std::span<const SweepPoint> points) {
  std::string out = "pairs,src_dev_f1,tgt_dev_f1,tgt_test_f1\n";
  for (const SweepPoint& p : points) {
    out += std::to_string(p.pairs);
    for (double v : {p.src_dev_f1, p.tgt_dev_f1, p.tgt_test_f1}) {
      out += ',';
      out += format_g17(v);
    }
    out += '\n';
  }
  return out;
}

AblationOutcome run_ablation(const EmbeddingStore& S, const EmbeddingStore& T,
                             const BilingualLexicon& lexicon,
                             const LabeledCorpus& source_corpus,
                             const LabeledCorpus& target_corpus,
                             const TrainConfig& base) {
  TrainConfig full_cfg = base;
  full_cfg.ablate_mprime = false;
  TrainConfig ablated_cfg = base;
  ablated_cfg.ablate_mprime = true;
  ablated_cfg.joint_dim = static_cast<int>(T.dim());
  return AblationOutcome{
      train(S, T, lexicon, source_corpus, full_cfg, &target_corpus),
      train(S, T, lexicon, source_corpus, ablated_cfg, &target_corpus),
  };
}

std::string ablation_to_csv(const AblationOutcome& outcome) {
  std::string out =
      "variant,best_epoch,src_dev_f1_best,tgt_dev_f1_best,src_dev_f1_max,tgt_dev_f1_max\n";
  auto emit = [&out](const char* name, const TrainResult& r) {
    const EpochRecord& best = r.trace[static_cast<size_t>(r.best_epoch - 1)];
    double src_max = 0.0, tgt_max = 0.0;
    for (const EpochRecord& rec : r.trace) {
      src_max = std::max(src_max, rec.src_dev_f1);
      tgt_max = std::max(tgt_max, rec.tgt_dev_f1);
    }
    out += name;
    out += ',';
    out += std::to_string(r.best_epoch);
    for (double v : {best.src_dev_f1, best.tgt_dev_f1, src_max, tgt_max}) {
      out += ',';
      out += format_g17(v);
    }
    out += '\n';
  };
  emit("full", outcome.full);
  emit("ablated", outcome.ablated);
  return out;
}

CosineTraceResult run_cosine_trace(const EmbeddingStore& S, const EmbeddingStore& T,
                                   const BilingualLexicon& lexicon,
                                   const LabeledCorpus& source_corpus,
                                   const LabeledCorpus* target_corpus,
                                   const BlsePipelineConfig& config,
                                   std::span<const std::string> source_positive,
                                   std::span<const std::string> source_negative,
                                   std::span<const std::string> target_positive,
                                   std::span<const std::string> target_negative) {
  Eigen::MatrixXd src_pos = gather_rows(S, source_positive, "source positive");
  Eigen::MatrixXd src_neg = gather_rows(S, source_negative, "source negative");
  Eigen::MatrixXd tgt_pos = gather_rows(T, target_positive, "target positive");
  Eigen::MatrixXd tgt_neg = gather_rows(T, target_negative, "target negative");

  BilingualLexicon lex = with_holdout(lexicon, config.lexicon_holdout, config.train.seed);
  Eigen::MatrixXd hold_src, hold_tgt;
  {
    std::vector<Eigen::RowVectorXd> srows, trows;
    for (const TranslationPair& p : lex.dev_pairs())
      if (S.contains(p.source) && T.contains(p.target)) {
        srows.push_back(S.row(S.row_of(p.source)));
        trows.push_back(T.row(T.row_of(p.target)));
      }
    require(!srows.empty(), "cosine trace: no held-out translation pair is covered");
    hold_src.resize(static_cast<Eigen::Index>(srows.size()), S.dim());
    hold_tgt.resize(static_cast<Eigen::Index>(trows.size()), T.dim());
    for (size_t i = 0; i < srows.size(); ++i) {
      hold_src.row(static_cast<Eigen::Index>(i)) = srows[i];
      hold_tgt.row(static_cast<Eigen::Index>(i)) = trows[i];
    }
  }

  CosineTraceResult result;
  EpochObserver observer = [&](int epoch, const BlseModel& model) {
    CosineTraceRecord rec;
    rec.epoch = epoch;
    Eigen::MatrixXd sp = src_pos * model.M;
    Eigen::MatrixXd sn = src_neg * model.M;
    Eigen::MatrixXd tp = model.ablated ? tgt_pos : Eigen::MatrixXd(tgt_pos * model.Mprime);
    Eigen::MatrixXd tn = model.ablated ? tgt_neg : Eigen::MatrixXd(tgt_neg * model.Mprime);
    rec.src_same_polarity = weighted_same_polarity(sp, sn);
    rec.src_cross_polarity = mean_cross_cosine(sp, sn);
    rec.tgt_same_polarity = weighted_same_polarity(tp, tn);
    rec.tgt_cross_polarity = mean_cross_cosine(tp, tn);
    Eigen::MatrixXd hs = hold_src * model.M;
    Eigen::MatrixXd ht = model.ablated ? hold_tgt : Eigen::MatrixXd(hold_tgt * model.Mprime);
    rec.translation = mean_paired_cosine(hs, ht);
    result.records.push_back(rec);
  };

  BlsePipelineResult pipeline =
      run_blse(S, T, lex, source_corpus, target_corpus, config, observer);
  result.trained = std::move(pipeline.trained);
  return result;
}

std::string cosine_trace_to_csv(std::span<const CosineTraceRecord> records) {
  std::string out =
      "epoch,src_same_polarity,src_cross_polarity,tgt_same_polarity,tgt_cross_polarity,"
      "translation\n";
  for (const CosineTraceRecord& r : records) {
    out += std::to_string(r.epoch);
    for (double v : {r.src_same_polarity, r.src_cross_polarity, r.tgt_same_polarity,
                     r.tgt_cross_polarity, r.translation}) {
      out += ',';
      out += format_g17(v);
    }
    out += '\n';
  }
  return out;
}

}  // namespace blse
