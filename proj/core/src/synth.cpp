#include "blse/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

#include "blse/rng.hpp"
#include "blse/util.hpp"

namespace blse {

namespace {

void check_config(const SynthConfig& c) {
  require(c.classes == 2 || c.classes == 4, "synth: classes must be 2 or 4");
  require(c.vocab >= 4 * c.classes, "synth: vocab must be at least 4x the class count");
  require(c.dim >= 2, "synth: dim must be at least 2");
  require(c.train_sentences >= 1 && c.dev_sentences >= 1 && c.test_sentences >= 1,
          "synth: every split needs at least one sentence");
  require(c.min_len >= 1 && c.max_len >= c.min_len, "synth: bad sentence length range");
  require(c.noise_sigma >= 0.0, "synth: noise sigma must be non-negative");
  require(c.lexicon_coverage > 0.0 && c.lexicon_coverage <= 1.0,
          "synth: infeasible configuration, lexicon coverage must be in (0, 1]");
  require(std::isfinite(c.polarity_bias), "synth: polarity bias must be finite");
}

Eigen::MatrixXd random_orthogonal(int dim, Rng& rng) {
  Eigen::MatrixXd G(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) G(r, c) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ();
  Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix the column signs so the factorization is unique.
  for (int j = 0; j < dim; ++j)
    if (R(j, j) < 0.0) Q.col(j) *= -1.0;
  return Q;
}

struct Sentence {
  std::vector<int> token_ids;
  double score = 0.0;  // sentiment direction dotted with the mean source vector
  Split split = Split::Train;
};

}  // namespace

SynthWorld generate(const SynthConfig& config) {
  check_config(config);
  const int V = config.vocab;
  const int d = config.dim;
  Rng rng(config.seed);

  Eigen::MatrixXd S(V, d);
  for (int r = 0; r < V; ++r)
    for (int c = 0; c < d; ++c) S(r, c) = rng.normal();

  Eigen::VectorXd w(d);
  for (int c = 0; c < d; ++c) w[c] = rng.normal();
  w.normalize();

  Eigen::MatrixXd Q = random_orthogonal(d, rng);

  Eigen::MatrixXd T = S * Q;
  for (int r = 0; r < V; ++r)
    for (int c = 0; c < d; ++c) T(r, c) += config.noise_sigma * rng.normal();

  std::vector<std::string> src_tokens(static_cast<size_t>(V));
  std::vector<std::string> tgt_tokens(static_cast<size_t>(V));
  for (int i = 0; i < V; ++i) {
    src_tokens[static_cast<size_t>(i)] = "s" + std::to_string(i);
    tgt_tokens[static_cast<size_t>(i)] = "t" + std::to_string(i);
  }

  // Per-token sentiment scores, standardized for the sampling tilt.
  Eigen::ArrayXd z = (S * w).array();
  const double z_mean = z.mean();
  const double z_sd = std::sqrt((z - z_mean).square().mean());
  Eigen::ArrayXd zhat = (z - z_mean) / (z_sd > 0.0 ? z_sd : 1.0);

  BilingualLexicon lexicon;
  {
    const int want = std::max(
        1, static_cast<int>(std::lround(config.lexicon_coverage * static_cast<double>(V))));
    std::vector<size_t> order = shuffled_indices(static_cast<size_t>(V), rng);
    order.resize(static_cast<size_t>(std::min(want, V)));
    std::sort(order.begin(), order.end());
    for (size_t i : order)
      lexicon.pairs.push_back({src_tokens[i], tgt_tokens[i]});
    lexicon.dev_mask.assign(lexicon.pairs.size(), false);
  }

  auto make_sentences = [&](int count, Split split, std::vector<Sentence>& out) {
    std::vector<double> cdf(static_cast<size_t>(V));
    for (int s = 0; s < count; ++s) {
      Sentence sent;
      sent.split = split;
      const int len =
          config.min_len +
          static_cast<int>(rng.below(static_cast<std::uint64_t>(config.max_len - config.min_len + 1)));
      const double tilt = config.polarity_bias * rng.normal();
      Eigen::ArrayXd logw = tilt * zhat;
      Eigen::ArrayXd wts = (logw - logw.maxCoeff()).exp();
      std::partial_sum(wts.data(), wts.data() + V, cdf.begin());
      const double total = cdf.back();
      double score = 0.0;
      for (int t = 0; t < len; ++t) {
        const double r = rng.uniform() * total;
        const int id = static_cast<int>(
            std::upper_bound(cdf.begin(), cdf.end(), r) - cdf.begin());
        const int tok = std::min(id, V - 1);
        sent.token_ids.push_back(tok);
        score += z[tok];
      }
      sent.score = score / static_cast<double>(len);
      out.push_back(std::move(sent));
    }
  };

  std::vector<Sentence> src_sentences, tgt_sentences;
  make_sentences(config.train_sentences, Split::Train, src_sentences);
  make_sentences(config.dev_sentences, Split::Dev, src_sentences);
  make_sentences(config.test_sentences, Split::Test, src_sentences);
  make_sentences(config.train_sentences, Split::Train, tgt_sentences);
  make_sentences(config.dev_sentences, Split::Dev, tgt_sentences);
  make_sentences(config.test_sentences, Split::Test, tgt_sentences);

  // Label thresholds from the pooled source-corpus score distribution; the
  // target corpus reuses them, so both languages share one labeling rule.
  std::vector<double> pool;
  pool.reserve(src_sentences.size());
  for (const Sentence& s : src_sentences) pool.push_back(s.score);
  std::sort(pool.begin(), pool.end());
  auto quantile = [&pool](double q) {
    const size_t idx = std::min(pool.size() - 1,
                                static_cast<size_t>(q * static_cast<double>(pool.size())));
    return pool[idx];
  };
  std::vector<double> thresholds;
  if (config.classes == 2)
    thresholds = {quantile(0.5)};
  else
    thresholds = {quantile(0.1), quantile(0.5), quantile(0.9)};

  auto label_of = [&thresholds](double score) {
    int label = 0;
    for (double t : thresholds)
      if (score > t) ++label;
    return label;
  };

  const Scheme scheme = config.classes == 2 ? Scheme::Binary : Scheme::FourClass;
  auto build_corpus = [&](const std::vector<Sentence>& sentences,
                          const std::vector<std::string>& token_names) {
    LabeledCorpus corpus;
    corpus.scheme = scheme;
    for (const Sentence& s : sentences) {
      Example ex;
      ex.label = label_of(s.score);
      ex.split = s.split;
      for (int id : s.token_ids)
        ex.tokens.push_back(token_names[static_cast<size_t>(id)]);
      corpus.examples.push_back(std::move(ex));
    }
    return corpus;
  };

  // Polarity extremes for cosine diagnostics.
  std::vector<int> by_score(static_cast<size_t>(V));
  std::iota(by_score.begin(), by_score.end(), 0);
  std::sort(by_score.begin(), by_score.end(),
            [&z](int a, int b) { return z[a] < z[b]; });
  const int set_size = std::max(2, std::min(10, V / 4));
  std::vector<std::string> src_pos, src_neg, tgt_pos, tgt_neg;
  for (int i = 0; i < set_size; ++i) {
    const int neg = by_score[static_cast<size_t>(i)];
    const int pos = by_score[static_cast<size_t>(V - 1 - i)];
    src_neg.push_back(src_tokens[static_cast<size_t>(neg)]);
    tgt_neg.push_back(tgt_tokens[static_cast<size_t>(neg)]);
    src_pos.push_back(src_tokens[static_cast<size_t>(pos)]);
    tgt_pos.push_back(tgt_tokens[static_cast<size_t>(pos)]);
  }

  return SynthWorld{
      .config = config,
      .source = EmbeddingStore(src_tokens, S, "source"),
      .target = EmbeddingStore(tgt_tokens, T, "target"),
      .lexicon = std::move(lexicon),
      .source_corpus = build_corpus(src_sentences, src_tokens),
      .target_corpus = build_corpus(tgt_sentences, tgt_tokens),
      .target_translated = build_corpus(tgt_sentences, src_tokens),
      .rotation = std::move(Q),
      .sentiment_direction = std::move(w),
      .source_positive = std::move(src_pos),
      .source_negative = std::move(src_neg),
      .target_positive = std::move(tgt_pos),
      .target_negative = std::move(tgt_neg),
  };
}

std::vector<std::string> save_world(const SynthWorld& world, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> written;
  auto path = [&dir](const char* name) {
    return (std::filesystem::path(dir) / name).string();
  };

  auto emit_corpus = [&](const LabeledCorpus& corpus, const char* stem) {
    for (auto [split, tag] : {std::pair{Split::Train, "train"},
                              std::pair{Split::Dev, "dev"},
                              std::pair{Split::Test, "test"}}) {
      std::string p = path((std::string(stem) + "_" + tag + ".tsv").c_str());
      save_corpus_split(corpus, split, p);
      written.push_back(std::move(p));
    }
  };

  std::string p = path("source_embeddings.txt");
  world.source.save_text(p);
  written.push_back(p);
  p = path("target_embeddings.txt");
  world.target.save_text(p);
  written.push_back(p);
  p = path("lexicon.tsv");
  save_lexicon(world.lexicon, p);
  written.push_back(p);

  emit_corpus(world.source_corpus, "source");
  emit_corpus(world.target_corpus, "target");
  emit_corpus(world.target_translated, "target_translated");

  auto emit_words = [&](const std::vector<std::string>& words, const char* name) {
    std::string out;
    for (const std::string& word : words) {
      out += word;
      out += '\n';
    }
    std::string wp = path(name);
    write_file(wp, out);
    written.push_back(std::move(wp));
  };
  emit_words(world.source_positive, "source_positive.txt");
  emit_words(world.source_negative, "source_negative.txt");
  emit_words(world.target_positive, "target_positive.txt");
  emit_words(world.target_negative, "target_negative.txt");
  return written;
}

}  // namespace blse
