#include <doctest.h>

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "blse/corpus.hpp"
#include "blse/lexicon.hpp"
#include "blse/projections.hpp"
#include "blse/rng.hpp"
#include "helpers.hpp"

using namespace blse;

namespace {

Eigen::MatrixXd random_orthogonal(int d, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd A(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) A(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
  Eigen::MatrixXd Q = qr.householderQ();
  Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j)
    if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
  return Q;
}

}  // namespace

TEST_CASE("least squares solution satisfies the normal equations") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const int n = 30, d = 6, dp = 4;
    EmbeddingStore S = testutil::random_store(n, d, seed, "s");
    EmbeddingStore T = testutil::random_store(n, dp, seed + 100, "t");
    const auto pairs = testutil::aligned_pairs(n, "s", "t");

    LinearMap map = solve_least_squares_map(S, T, pairs);
    REQUIRE(map.W.rows() == d);
    REQUIRE(map.W.cols() == dp);
    CHECK(map.pairs_used == n);

    // Independent solution through the normal equations.
    const Eigen::MatrixXd& Sp = S.matrix();
    const Eigen::MatrixXd& Tp = T.matrix();
    Eigen::MatrixXd W0 = (Sp.transpose() * Sp).ldlt().solve(Sp.transpose() * Tp);
    CHECK((map.W - W0).norm() < 1e-9);

    const double res0 = (Sp * W0 - Tp).squaredNorm() / static_cast<double>(n);
    CHECK(map.residual == doctest::Approx(res0).epsilon(1e-9));
  }
}

TEST_CASE("a noiseless rotation is recovered exactly") {
  const int n = 40, d = 8;
  EmbeddingStore S = testutil::random_store(n, d, 7, "s");
  Eigen::MatrixXd Q = random_orthogonal(d, 11);
  std::vector<std::string> tgt_tokens;
  for (int i = 0; i < n; ++i) tgt_tokens.push_back("t" + std::to_string(i));
  EmbeddingStore T(tgt_tokens, S.matrix() * Q, "tgt");
  const auto pairs = testutil::aligned_pairs(n, "s", "t");

  SUBCASE("plain least squares") {
    LinearMap map = solve_least_squares_map(S, T, pairs);
    CHECK((map.W - Q).norm() < 1e-6);
    CHECK(map.residual < 1e-18);
  }
  SUBCASE("orthogonal fit") {
    LinearMap map = solve_least_squares_map(S, T, pairs, true);
    CHECK((map.W - Q).norm() < 1e-6);
    CHECK((map.W.transpose() * map.W - Eigen::MatrixXd::Identity(d, d)).norm() < 1e-9);
  }
}

TEST_CASE("the orthogonal fit stays orthogonal under noise") {
  const int n = 50, d = 6;
  EmbeddingStore S = testutil::random_store(n, d, 3, "s");
  Eigen::MatrixXd Q = random_orthogonal(d, 4);
  Eigen::MatrixXd noisy = S.matrix() * Q;
  Rng rng(9);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) noisy(i, j) += 0.2 * rng.normal();
  std::vector<std::string> tgt_tokens;
  for (int i = 0; i < n; ++i) tgt_tokens.push_back("t" + std::to_string(i));
  EmbeddingStore T(tgt_tokens, noisy, "tgt");

  LinearMap map = solve_least_squares_map(S, T, testutil::aligned_pairs(n, "s", "t"), true);
  CHECK((map.W.transpose() * map.W - Eigen::MatrixXd::Identity(d, d)).norm() < 1e-9);
}

TEST_CASE("uncovered pairs are skipped and an empty overlap is an error") {
  EmbeddingStore S = testutil::random_store(10, 4, 1, "s");
  EmbeddingStore T = testutil::random_store(10, 3, 2, "t");
  auto pairs = testutil::aligned_pairs(10, "s", "t");
  pairs.push_back({"missing", "t0"});
  pairs.push_back({"s0", "missing"});
  LinearMap map = solve_least_squares_map(S, T, pairs);
  CHECK(map.pairs_used == 10);

  const std::vector<TranslationPair> junk = {{"nope", "nada"}};
  CHECK_THROWS(solve_least_squares_map(S, T, junk));
}

TEST_CASE("the orthogonal fit requires equal dimensions") {
  EmbeddingStore S = testutil::random_store(10, 4, 1, "s");
  EmbeddingStore T = testutil::random_store(10, 3, 2, "t");
  CHECK_THROWS(solve_least_squares_map(S, T, testutil::aligned_pairs(10, "s", "t"), true));
}

TEST_CASE("project_source applies the map and keeps tokens") {
  EmbeddingStore S = testutil::random_store(12, 5, 21, "s");
  LinearMap map;
  map.W = Eigen::MatrixXd::Random(5, 3);
  EmbeddingStore P = project_source(S, map);
  CHECK(P.tokens() == S.tokens());
  CHECK(P.dim() == 3);
  CHECK((P.matrix() - S.matrix() * map.W).norm() < 1e-12);

  map.W = Eigen::MatrixXd::Random(4, 3);  // wrong input dim
  CHECK_THROWS(project_source(S, map));
}

namespace {

LabeledCorpus token_corpus(const std::vector<std::vector<std::string>>& sentences,
                           Scheme scheme = Scheme::Binary) {
  LabeledCorpus corpus;
  corpus.scheme = scheme;
  for (const auto& toks : sentences) {
    Example ex;
    ex.tokens = toks;
    ex.label = 0;
    ex.split = Split::Train;
    corpus.examples.push_back(std::move(ex));
  }
  return corpus;
}

}  // namespace

TEST_CASE("pseudo-bilingual mixing replaces about half the lexicon occurrences") {
  // 4000 occurrences of a covered token on each side.
  std::vector<std::vector<std::string>> src(2000, {"s0", "s1", "plain"});
  std::vector<std::vector<std::string>> tgt(2000, {"t0", "other"});
  LabeledCorpus source = token_corpus(src);
  LabeledCorpus target = token_corpus(tgt);

  BilingualLexicon lex;
  lex.pairs = {{"s0", "t0"}, {"s1", "t1"}};
  lex.dev_mask = {false, false};

  LabeledCorpus mixed = make_pseudo_bilingual(source, target, lex, 5);
  REQUIRE(mixed.examples.size() == 4000);

  // Source examples come first, in order, with lengths and the uncovered
  // tokens untouched.
  int s0_kept = 0, s0_swapped = 0;
  for (size_t i = 0; i < 2000; ++i) {
    const Example& ex = mixed.examples[i];
    REQUIRE(ex.tokens.size() == 3);
    CHECK(ex.tokens[2] == "plain");
    if (ex.tokens[0] == "s0")
      ++s0_kept;
    else {
      CHECK(ex.tokens[0] == "t0");
      ++s0_swapped;
    }
    CHECK((ex.tokens[1] == "s1" || ex.tokens[1] == "t1"));
  }
  int t0_swapped = 0;
  for (size_t i = 2000; i < 4000; ++i) {
    const Example& ex = mixed.examples[i];
    REQUIRE(ex.tokens.size() == 2);
    CHECK(ex.tokens[1] == "other");
    if (ex.tokens[0] == "s0") ++t0_swapped;
  }

  // Binomial(2000, 1/2): 3.5 sigma is about 78.
  CHECK(s0_swapped > 1000 - 80);
  CHECK(s0_swapped < 1000 + 80);
  CHECK(t0_swapped > 1000 - 80);
  CHECK(t0_swapped < 1000 + 80);
  CHECK(s0_kept + s0_swapped == 2000);
}

TEST_CASE("pseudo-bilingual mixing draws uniformly among alternatives") {
  std::vector<std::vector<std::string>> src(3000, {"s0"});
  LabeledCorpus source = token_corpus(src);
  LabeledCorpus target = token_corpus({{"x"}});

  BilingualLexicon lex;
  lex.pairs = {{"s0", "ta"}, {"s0", "tb"}};
  lex.dev_mask = {false, false};

  LabeledCorpus mixed = make_pseudo_bilingual(source, target, lex, 17);
  std::map<std::string, int> counts;
  for (size_t i = 0; i < 3000; ++i) counts[mixed.examples[i].tokens[0]]++;
  // Replaced about 1500 times, split evenly between the two translations.
  const int replaced = counts["ta"] + counts["tb"];
  CHECK(replaced > 1500 - 100);
  CHECK(replaced < 1500 + 100);
  CHECK(std::abs(counts["ta"] - counts["tb"]) < 150);
}

TEST_CASE("pseudo-bilingual mixing keeps labels and splits and is deterministic") {
  LabeledCorpus source = token_corpus({{"s0", "q"}, {"s0"}});
  source.examples[0].label = 1;
  source.examples[1].split = Split::Dev;
  LabeledCorpus target = token_corpus({{"t0", "z"}});
  target.examples[0].label = 1;
  target.examples[0].split = Split::Test;

  BilingualLexicon lex;
  lex.pairs = {{"s0", "t0"}};
  lex.dev_mask = {false};

  LabeledCorpus a = make_pseudo_bilingual(source, target, lex, 3);
  LabeledCorpus b = make_pseudo_bilingual(source, target, lex, 3);
  REQUIRE(a.examples.size() == 3);
  CHECK(a.examples[0].label == 1);
  CHECK(a.examples[1].split == Split::Dev);
  CHECK(a.examples[2].split == Split::Test);
  CHECK(a.examples[2].label == 1);
  for (size_t i = 0; i < a.examples.size(); ++i)
    CHECK(a.examples[i].tokens == b.examples[i].tokens);
}

TEST_CASE("pseudo-bilingual mixing validates schemes and the lexicon") {
  LabeledCorpus source = token_corpus({{"s0"}});
  LabeledCorpus target4 = token_corpus({{"t0"}}, Scheme::FourClass);
  BilingualLexicon lex;
  lex.pairs = {{"s0", "t0"}};
  lex.dev_mask = {false};
  CHECK_THROWS_WITH_AS(make_pseudo_bilingual(source, target4, lex, 1),
                       doctest::Contains("schemes differ"), std::runtime_error);

  LabeledCorpus target = token_corpus({{"t0"}});
  BilingualLexicon all_dev;
  all_dev.pairs = {{"s0", "t0"}};
  all_dev.dev_mask = {true};  // nothing left for training
  CHECK_THROWS(make_pseudo_bilingual(source, target, all_dev, 1));
}
