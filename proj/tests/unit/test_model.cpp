#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "blse/model.hpp"
#include "blse/rng.hpp"
#include "blse/util.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace blse;

namespace {

BlseModel random_model(int d, int dprime, int k, int c, std::uint64_t seed,
                       bool ablated = false) {
  Rng rng(seed);
  BlseModel model;
  model.M = Eigen::MatrixXd::NullaryExpr(d, k, [&] { return rng.normal() * 0.3; });
  if (!ablated)
    model.Mprime =
        Eigen::MatrixXd::NullaryExpr(dprime, k, [&] { return rng.normal() * 0.3; });
  model.P = Eigen::MatrixXd::NullaryExpr(k, c, [&] { return rng.normal() * 0.3; });
  model.class_count = c;
  model.ablated = ablated;
  return model;
}

// Straight-line re-implementations of the losses, no shared code with the
// library versions.
double naive_projection_loss(const BlseModel& model, const EmbeddingStore& S,
                             const EmbeddingStore& T,
                             const std::vector<TranslationPair>& pairs) {
  double total = 0.0;
  for (const TranslationPair& pair : pairs) {
    const Eigen::RowVectorXd ps = S.row(S.row_of(pair.source)) * model.M;
    Eigen::RowVectorXd pt;
    if (model.ablated)
      pt = T.row(T.row_of(pair.target));
    else
      pt = T.row(T.row_of(pair.target)) * model.Mprime;
    total += (ps - pt).squaredNorm();
  }
  return total / static_cast<double>(pairs.size());
}

double naive_sentiment_loss(const BlseModel& model, const EmbeddingStore& S,
                            const std::vector<Example>& batch) {
  double total = 0.0;
  int counted = 0;
  for (const Example& ex : batch) {
    Eigen::RowVectorXd avg = Eigen::RowVectorXd::Zero(S.dim());
    int known = 0;
    for (const std::string& token : ex.tokens) {
      if (auto row = S.find(token)) {
        avg += S.row(*row);
        ++known;
      }
    }
    if (known == 0) continue;
    avg /= known;
    Eigen::RowVectorXd logits = avg * model.M * model.P;
    const double shift = logits.maxCoeff();
    const double denom = (logits.array() - shift).exp().sum();
    total -= (logits(ex.label) - shift) - std::log(denom);
    ++counted;
  }
  return counted > 0 ? total / counted : 0.0;
}

struct Instance {
  BlseModel model;
  EmbeddingStore S;
  EmbeddingStore T;
  std::vector<Example> batch;
  std::vector<TranslationPair> pairs;
  double alpha = 0.3;
};

Instance random_instance(std::uint64_t seed, bool ablated = false) {
  Rng rng(seed);
  const int d = 2 + static_cast<int>(rng.below(9));
  const int dprime = 2 + static_cast<int>(rng.below(9));
  const int k = ablated ? dprime : 2 + static_cast<int>(rng.below(9));
  const int c = 2 + static_cast<int>(rng.below(3));
  const double alphas[] = {0.0, 0.3, 0.7, 1.0};
  Instance inst{random_model(d, dprime, k, c, seed + 1, ablated),
                testutil::random_store(8, d, seed + 2, "s"),
                testutil::random_store(8, dprime, seed + 3, "t"),
                testutil::random_batch(4, 2, 5, 8, c, seed + 4, "s"),
                testutil::aligned_pairs(5, "s", "t"),
                alphas[rng.below(4)]};
  return inst;
}

double fd_derivative(const Instance& inst, Eigen::MatrixXd BlseModel::*field,
                     Eigen::Index r, Eigen::Index c) {
  const double h = 1e-5;
  BlseModel lo = inst.model, hi = inst.model;
  (lo.*field)(r, c) -= h;
  (hi.*field)(r, c) += h;
  const double jlo = joint_loss(lo, inst.S, inst.T, inst.batch, inst.pairs, inst.alpha);
  const double jhi = joint_loss(hi, inst.S, inst.T, inst.batch, inst.pairs, inst.alpha);
  return (jhi - jlo) / (2.0 * h);
}

double max_rel_error(const Instance& inst) {
  const Gradients grads =
      gradients(inst.model, inst.S, inst.T, inst.batch, inst.pairs, inst.alpha);
  double worst = 0.0;
  auto check_block = [&](Eigen::MatrixXd BlseModel::*field, const Eigen::MatrixXd& g) {
    for (Eigen::Index r = 0; r < g.rows(); ++r)
      for (Eigen::Index c = 0; c < g.cols(); ++c) {
        const double fd = fd_derivative(inst, field, r, c);
        const double rel =
            std::abs(g(r, c) - fd) / std::max({std::abs(g(r, c)), std::abs(fd), 1e-3});
        worst = std::max(worst, rel);
      }
  };
  check_block(&BlseModel::M, grads.M);
  if (!inst.model.ablated) check_block(&BlseModel::Mprime, grads.Mprime);
  check_block(&BlseModel::P, grads.P);
  return worst;
}

}  // namespace

TEST_CASE("projection loss matches the naive loop") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const Instance inst = random_instance(seed);
    CHECK(projection_loss(inst.model, inst.S, inst.T, inst.pairs) ==
          doctest::Approx(naive_projection_loss(inst.model, inst.S, inst.T, inst.pairs))
              .epsilon(1e-12));
  }
}

TEST_CASE("ablated projection loss compares against raw target vectors") {
  const Instance inst = random_instance(11, true);
  REQUIRE(inst.model.ablated);
  REQUIRE(inst.model.Mprime.size() == 0);
  CHECK(projection_loss(inst.model, inst.S, inst.T, inst.pairs) ==
        doctest::Approx(naive_projection_loss(inst.model, inst.S, inst.T, inst.pairs))
            .epsilon(1e-12));
}

TEST_CASE("sentiment loss matches the naive loop") {
  for (std::uint64_t seed : {4ull, 5ull, 6ull}) {
    const Instance inst = random_instance(seed);
    CHECK(sentiment_loss(inst.model, inst.S, inst.batch) ==
          doctest::Approx(naive_sentiment_loss(inst.model, inst.S, inst.batch))
              .epsilon(1e-12));
  }
}

TEST_CASE("joint loss is the alpha blend of its terms") {
  const Instance inst = random_instance(7);
  const double sent = sentiment_loss(inst.model, inst.S, inst.batch);
  const double proj = projection_loss(inst.model, inst.S, inst.T, inst.pairs);
  for (double alpha : {0.0, 0.25, 1.0}) {
    CHECK(joint_loss(inst.model, inst.S, inst.T, inst.batch, inst.pairs, alpha) ==
          doctest::Approx(alpha * sent + (1.0 - alpha) * proj).epsilon(1e-12));
  }
}

TEST_CASE("analytic gradients match central finite differences") {
  for (std::uint64_t seed = 20; seed < 26; ++seed) {
    const Instance inst = random_instance(seed, seed % 3 == 0);
    CHECK(max_rel_error(inst) < 1e-4);
  }
}

TEST_CASE("gradient endpoints: alpha 0 freezes P, alpha 1 freezes Mprime") {
  const Instance inst = random_instance(31);
  const Gradients at0 =
      gradients(inst.model, inst.S, inst.T, inst.batch, inst.pairs, 0.0);
  CHECK(at0.P.norm() == 0.0);
  CHECK(at0.M.norm() > 0.0);
  const Gradients at1 =
      gradients(inst.model, inst.S, inst.T, inst.batch, inst.pairs, 1.0);
  CHECK(at1.Mprime.norm() == 0.0);
  CHECK(at1.P.norm() > 0.0);
}

TEST_CASE("adam first step moves by lr times the gradient sign") {
  Eigen::MatrixXd params = Eigen::MatrixXd::Zero(3, 2);
  Eigen::MatrixXd grad(3, 2);
  grad << 0.5, -2.0, 1e-2, 3.0, -0.7, 0.04;
  AdamState state = AdamState::like(params);
  CHECK(state.m.norm() == 0.0);
  CHECK(state.v.norm() == 0.0);
  const double lr = 1e-3;
  adam_step(state, params, grad, lr);
  CHECK(state.step == 1);
  for (Eigen::Index r = 0; r < grad.rows(); ++r)
    for (Eigen::Index c = 0; c < grad.cols(); ++c)
      CHECK(params(r, c) ==
            doctest::Approx(-lr * (grad(r, c) > 0 ? 1.0 : -1.0)).epsilon(1e-5));
}

TEST_CASE("adam rejects non-finite gradients and shape mismatches") {
  Eigen::MatrixXd params = Eigen::MatrixXd::Zero(2, 2);
  AdamState state = AdamState::like(params);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(2, 2);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS(adam_step(state, params, bad, 1e-3));
  Eigen::MatrixXd wrong = Eigen::MatrixXd::Zero(3, 2);
  CHECK_THROWS(adam_step(state, params, wrong, 1e-3));
}

namespace {

// Tiny labeled world where the first embedding coordinate determines the
// label, so a few epochs must already separate the classes.
struct TinyWorld {
  EmbeddingStore S;
  EmbeddingStore T;
  BilingualLexicon lexicon;
  LabeledCorpus corpus;
};

TinyWorld tiny_world(std::uint64_t seed) {
  const int vocab = 40, dim = 6;
  Rng rng(seed);
  Eigen::MatrixXd src(vocab, dim);
  for (int i = 0; i < vocab; ++i)
    for (int j = 0; j < dim; ++j) src(i, j) = rng.normal();
  std::vector<std::string> stoks, ttoks;
  for (int i = 0; i < vocab; ++i) stoks.push_back("s" + std::to_string(i));
  for (int i = 0; i < vocab; ++i) ttoks.push_back("t" + std::to_string(i));
  TinyWorld world{EmbeddingStore(stoks, src, "source"),
                  EmbeddingStore(ttoks, src, "target"),  // identity "rotation"
                  testutil::aligned_lexicon(vocab, "s", "t"),
                  {}};
  world.corpus.scheme = Scheme::Binary;
  for (int n = 0; n < 60; ++n) {
    Example ex;
    double score = 0.0;
    for (int j = 0; j < 4; ++j) {
      const int tok = static_cast<int>(rng.below(vocab));
      ex.tokens.push_back("s" + std::to_string(tok));
      score += src(tok, 0);
    }
    ex.label = score > 0 ? 1 : 0;
    ex.split = n < 45 ? Split::Train : Split::Dev;
    world.corpus.examples.push_back(std::move(ex));
  }
  return world;
}

}  // namespace

TEST_CASE("training reduces the joint loss and fills the trace") {
  const TinyWorld world = tiny_world(3);
  TrainConfig config;
  config.epochs = 12;
  config.batch_size = 16;
  config.seed = 9;
  const TrainResult result =
      train(world.S, world.T, world.lexicon, world.corpus, config);
  REQUIRE(result.trace.size() == 12);
  CHECK(result.trace.front().epoch == 1);
  CHECK(result.trace.back().epoch == 12);
  CHECK(result.trace.back().joint_loss < result.trace.front().joint_loss);
  CHECK(result.best_epoch >= 1);
  CHECK(result.best_epoch <= 12);
  CHECK(result.dropped_uncovered_pairs == 0);
  for (const EpochRecord& rec : result.trace) {
    CHECK(std::isfinite(rec.joint_loss));
    CHECK(std::isfinite(rec.src_dev_f1));
  }
}

TEST_CASE("training is bit-for-bit deterministic per seed") {
  const TinyWorld world = tiny_world(4);
  TrainConfig config;
  config.epochs = 5;
  config.batch_size = 8;
  config.seed = 11;
  const TrainResult a = train(world.S, world.T, world.lexicon, world.corpus, config);
  const TrainResult b = train(world.S, world.T, world.lexicon, world.corpus, config);
  CHECK(testutil::same_bits(a.model.M, b.model.M));
  CHECK(testutil::same_bits(a.model.Mprime, b.model.Mprime));
  CHECK(testutil::same_bits(a.model.P, b.model.P));
  CHECK(trace_to_csv(a.trace) == trace_to_csv(b.trace));

  config.seed = 12;
  const TrainResult c = train(world.S, world.T, world.lexicon, world.corpus, config);
  CHECK(!testutil::same_bits(a.model.M, c.model.M));
}

TEST_CASE("uncovered lexicon pairs are dropped and counted") {
  TinyWorld world = tiny_world(5);
  world.lexicon.pairs.push_back({"s0", "missing"});
  world.lexicon.pairs.push_back({"ghost", "t0"});
  world.lexicon.dev_mask.assign(world.lexicon.pairs.size(), false);
  TrainConfig config;
  config.epochs = 2;
  const TrainResult result =
      train(world.S, world.T, world.lexicon, world.corpus, config);
  CHECK(result.dropped_uncovered_pairs == 2);
}

TEST_CASE("an empty usable lexicon needs the explicit opt-in") {
  TinyWorld world = tiny_world(6);
  world.lexicon.pairs = {{"ghost", "t0"}};
  world.lexicon.dev_mask = {false};
  TrainConfig config;
  config.epochs = 2;
  CHECK_THROWS(train(world.S, world.T, world.lexicon, world.corpus, config));
  config.allow_empty_lexicon = true;
  const TrainResult result =
      train(world.S, world.T, world.lexicon, world.corpus, config);
  CHECK(result.trace.back().proj_loss == 0.0);
}

TEST_CASE("ablated training constrains the joint width to the target dim") {
  const TinyWorld world = tiny_world(7);
  TrainConfig config;
  config.epochs = 3;
  config.ablate_mprime = true;
  const TrainResult result =
      train(world.S, world.T, world.lexicon, world.corpus, config);
  CHECK(result.model.ablated);
  CHECK(result.model.Mprime.size() == 0);
  CHECK(result.model.joint_dim() == world.T.dim());

  config.joint_dim = static_cast<int>(world.T.dim()) + 1;
  CHECK_THROWS(train(world.S, world.T, world.lexicon, world.corpus, config));
}

TEST_CASE("prediction applies softmax over the projected average") {
  Eigen::MatrixXd emb(2, 2);
  emb << 1.0, 0.0, 0.0, 1.0;
  const EmbeddingStore store({"u", "v"}, emb);
  BlseModel model;
  model.M = Eigen::MatrixXd::Identity(2, 2);
  model.Mprime = Eigen::MatrixXd::Identity(2, 2);
  model.P = Eigen::MatrixXd(2, 2);
  model.P << 2.0, -1.0, 0.0, 0.5;
  model.class_count = 2;

  const std::vector<std::string> tokens = {"u"};
  const Prediction pred = predict_source(model, store, tokens);
  const double z0 = 2.0, z1 = -1.0;
  const double p0 = std::exp(z0) / (std::exp(z0) + std::exp(z1));
  CHECK(pred.probs(0) == doctest::Approx(p0).epsilon(1e-12));
  CHECK(pred.label == 0);
  CHECK_FALSE(pred.degenerate);

  // Target side goes through Mprime in the full model.
  const Prediction tgt = predict_target(model, store, tokens);
  CHECK(tgt.probs(0) == doctest::Approx(p0).epsilon(1e-12));
}

TEST_CASE("ablated target prediction skips every projector") {
  Eigen::MatrixXd emb(1, 2);
  emb << 0.5, -1.5;
  const EmbeddingStore store({"w"}, emb);
  BlseModel model;
  model.M = Eigen::MatrixXd::Identity(2, 2);
  model.P = Eigen::MatrixXd(2, 2);
  model.P << 1.0, 0.0, 0.0, 1.0;
  model.class_count = 2;
  model.ablated = true;

  const std::vector<std::string> tokens = {"w"};
  const Prediction pred = predict_target(model, store, tokens);
  const double z0 = 0.5, z1 = -1.5;
  const double p0 = std::exp(z0) / (std::exp(z0) + std::exp(z1));
  CHECK(pred.probs(0) == doctest::Approx(p0).epsilon(1e-12));
  CHECK(pred.label == 0);
}

TEST_CASE("degenerate sentences fall back to the majority class") {
  Eigen::MatrixXd emb(1, 2);
  emb << 1.0, 1.0;
  const EmbeddingStore store({"known"}, emb);
  BlseModel model;
  model.M = Eigen::MatrixXd::Identity(2, 2);
  model.Mprime = Eigen::MatrixXd::Identity(2, 2);
  model.P = Eigen::MatrixXd::Identity(2, 2);
  model.class_count = 2;
  model.majority_class = 1;

  const std::vector<std::string> tokens = {"oov1", "oov2"};
  const Prediction pred = predict_source(model, store, tokens);
  CHECK(pred.degenerate);
  CHECK(pred.label == 1);
  CHECK(pred.probs(0) == doctest::Approx(0.5));
  CHECK(pred.probs(1) == doctest::Approx(0.5));
}

TEST_CASE("model files round-trip bitwise") {
  testutil::TempDir tmp("model_rt");
  const BlseModel model = random_model(4, 3, 5, 2, 17);
  save_model(model, tmp.path("m.txt"));
  const BlseModel loaded = load_model(tmp.path("m.txt"));
  CHECK(testutil::same_bits(loaded.M, model.M));
  CHECK(testutil::same_bits(loaded.Mprime, model.Mprime));
  CHECK(testutil::same_bits(loaded.P, model.P));
  CHECK(loaded.class_count == 2);
  CHECK_FALSE(loaded.ablated);

  BlseModel ab = random_model(4, 5, 5, 3, 18, true);
  save_model(ab, tmp.path("a.txt"));
  const BlseModel ab_loaded = load_model(tmp.path("a.txt"));
  CHECK(ab_loaded.ablated);
  CHECK(ab_loaded.Mprime.size() == 0);
  CHECK(testutil::same_bits(ab_loaded.M, ab.M));
  CHECK(testutil::same_bits(ab_loaded.P, ab.P));
}

TEST_CASE("the model format does not carry the majority class") {
  testutil::TempDir tmp("model_mc");
  BlseModel model = random_model(3, 3, 3, 2, 19);
  model.majority_class = 1;
  save_model(model, tmp.path("m.txt"));
  CHECK(load_model(tmp.path("m.txt")).majority_class == 0);
}

TEST_CASE("model loader rejects corrupted files") {
  testutil::TempDir tmp("model_bad");
  const BlseModel model = random_model(3, 3, 3, 2, 21);
  save_model(model, tmp.path("m.txt"));
  const std::string good = read_file(tmp.path("m.txt"));

  write_file(tmp.path("h.txt"), "XYZ " + good.substr(5));
  CHECK_THROWS(load_model(tmp.path("h.txt")));

  write_file(tmp.path("trunc.txt"), good.substr(0, good.size() / 2));
  CHECK_THROWS(load_model(tmp.path("trunc.txt")));

  write_file(tmp.path("extra.txt"), good + "1 2 3\n");
  CHECK_THROWS(load_model(tmp.path("extra.txt")));
}

TEST_CASE("trace CSV has the documented header and one row per epoch") {
  EpochTrace trace = {{1, 0.5, 0.4, 0.6, 0.7, 0.6, 0.9},
                      {2, 0.4, 0.3, 0.5, 0.8, 0.7, 0.95}};
  const std::string csv = trace_to_csv(trace);
  CHECK(csv.find(trace_csv_header()) == 0);
  CHECK(trace_csv_header() ==
        "epoch,joint_loss,proj_loss,sent_loss,src_dev_f1,tgt_dev_f1,holdout_cos");
  int newlines = 0;
  for (char ch : csv)
    if (ch == '\n') ++newlines;
  CHECK(newlines == 3);
}
