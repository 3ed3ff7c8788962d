#include "blse/sgns.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "blse/rng.hpp"
#include "blse/util.hpp"

namespace blse {
namespace {

struct Vocab {
  std::vector<std::string> tokens;      // sorted by count desc, then first seen
  std::vector<long long> counts;
  std::unordered_map<std::string, int> ids;
  long long total = 0;
};

Vocab build_vocab(const std::vector<std::vector<std::string>>& corpus,
                  int min_count) {
  std::unordered_map<std::string, long long> counts;
  std::unordered_map<std::string, long long> first_seen;
  long long position = 0;
  for (const auto& sentence : corpus) {
    for (const auto& token : sentence) {
      auto [it, inserted] = counts.emplace(token, 0);
      if (inserted) first_seen.emplace(token, position);
      ++it->second;
      ++position;
    }
  }

  std::vector<std::string> kept;
  for (const auto& [token, count] : counts) {
    if (count >= min_count) kept.push_back(token);
  }
  require(!kept.empty(), "train_sgns: empty vocabulary after min-count filtering");
  std::sort(kept.begin(), kept.end(), [&](const std::string& a, const std::string& b) {
    if (counts[a] != counts[b]) return counts[a] > counts[b];
    return first_seen[a] < first_seen[b];
  });

  Vocab vocab;
  vocab.tokens = std::move(kept);
  vocab.counts.reserve(vocab.tokens.size());
  for (std::size_t i = 0; i < vocab.tokens.size(); ++i) {
    vocab.ids.emplace(vocab.tokens[i], static_cast<int>(i));
    vocab.counts.push_back(counts[vocab.tokens[i]]);
    vocab.total += counts[vocab.tokens[i]];
  }
  return vocab;
}

// Cumulative unigram^0.75 distribution; sampled by binary search.
std::vector<double> negative_cdf(const Vocab& vocab) {
  std::vector<double> cdf(vocab.counts.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < vocab.counts.size(); ++i) {
    acc += std::pow(static_cast<double>(vocab.counts[i]), 0.75);
    cdf[i] = acc;
  }
  for (double& x : cdf) x /= acc;
  return cdf;
}

int sample_negative(const std::vector<double>& cdf, Rng& rng) {
  double u = rng.uniform();
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  if (it == cdf.end()) --it;
  return static_cast<int>(it - cdf.begin());
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

EmbeddingStore train_sgns(const std::vector<std::vector<std::string>>& corpus,
                          const SgnsConfig& config) {
  require(!corpus.empty(), "train_sgns: empty corpus");
  require(config.dim >= 1 && config.window >= 1 && config.negative >= 1 &&
              config.epochs >= 1 && config.learning_rate > 0.0,
          "train_sgns: invalid configuration");

  Vocab vocab = build_vocab(corpus, config.min_count);
  const int v = static_cast<int>(vocab.tokens.size());
  const int d = config.dim;
  auto cdf = negative_cdf(vocab);

  Rng rng(config.seed);

  // Input vectors small-uniform, output vectors zero (the usual SGNS start).
  Eigen::MatrixXd input(v, d);
  for (int r = 0; r < v; ++r)
    for (int c = 0; c < d; ++c) input(r, c) = (rng.uniform() - 0.5) / d;
  Eigen::MatrixXd output = Eigen::MatrixXd::Zero(v, d);

  // Sentences as ids; unknown / filtered tokens are dropped up front.
  std::vector<std::vector<int>> encoded;
  encoded.reserve(corpus.size());
  for (const auto& sentence : corpus) {
    std::vector<int> ids;
    ids.reserve(sentence.size());
    for (const auto& token : sentence) {
      auto it = vocab.ids.find(token);
      if (it != vocab.ids.end()) ids.push_back(it->second);
    }
    if (!ids.empty()) encoded.push_back(std::move(ids));
  }
  require(!encoded.empty(), "train_sgns: no sentences survive vocabulary filtering");

  const double total_words =
      static_cast<double>(vocab.total) * config.epochs + 1.0;
  long long processed = 0;
  Eigen::VectorXd grad_input(d);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (const auto& sentence_ids : encoded) {
      // Occurrence-level subsampling of frequent words.
      std::vector<int> kept;
      kept.reserve(sentence_ids.size());
      for (int id : sentence_ids) {
        ++processed;
        if (config.subsample > 0.0) {
          double freq = static_cast<double>(vocab.counts[id]) / vocab.total;
          double keep = (std::sqrt(freq / config.subsample) + 1.0) *
                        config.subsample / freq;
          if (keep < 1.0 && rng.uniform() >= keep) continue;
        }
        kept.push_back(id);
      }
      if (kept.size() < 2) continue;

      double lr = config.learning_rate *
                  std::max(1.0 - static_cast<double>(processed) / total_words, 1e-4);

      const int n = static_cast<int>(kept.size());
      for (int center_pos = 0; center_pos < n; ++center_pos) {
        int center = kept[static_cast<std::size_t>(center_pos)];
        int half = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(config.window)));
        int lo = std::max(0, center_pos - half);
        int hi = std::min(n - 1, center_pos + half);
        for (int ctx_pos = lo; ctx_pos <= hi; ++ctx_pos) {
          if (ctx_pos == center_pos) continue;
          int context = kept[static_cast<std::size_t>(ctx_pos)];

          auto in_row = input.row(context);
          grad_input.setZero();
          for (int k = 0; k <= config.negative; ++k) {
            int target;
            double label;
            if (k == 0) {
              target = center;
              label = 1.0;
            } else {
              target = sample_negative(cdf, rng);
              if (target == center) continue;
              label = 0.0;
            }
            auto out_row = output.row(target);
            double score = sigmoid(in_row.dot(out_row));
            double g = lr * (label - score);
            grad_input += g * out_row.transpose();
            output.row(target) += g * in_row;
          }
          input.row(context) += grad_input.transpose();
        }
      }
    }
  }

  return EmbeddingStore(std::move(vocab.tokens), std::move(input),
                        config.language_tag);
}

}  // namespace blse
