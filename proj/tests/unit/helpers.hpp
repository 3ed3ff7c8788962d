#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "blse/corpus.hpp"
#include "blse/embeddings.hpp"
#include "blse/lexicon.hpp"
#include "blse/rng.hpp"

namespace testutil {

// Scratch directory under the test binary's cwd, wiped on construction and
// destruction so reruns never see stale files.
struct TempDir {
  std::filesystem::path dir;

  explicit TempDir(const std::string& name) : dir(std::filesystem::path("scratch") / name) {
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
  }
  ~TempDir() { std::filesystem::remove_all(dir); }

  std::string path(const std::string& file) const { return (dir / file).string(); }
};

// Bitwise matrix equality: exact, sign-of-zero aware, suitable for
// round-trip and determinism checks.
inline bool same_bits(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         (a.size() == 0 ||
          std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0);
}

inline blse::EmbeddingStore random_store(int vocab, int dim, std::uint64_t seed,
                                         const std::string& prefix,
                                         const std::string& tag = "") {
  blse::Rng rng(seed);
  Eigen::MatrixXd mat(vocab, dim);
  for (int i = 0; i < vocab; ++i)
    for (int j = 0; j < dim; ++j) mat(i, j) = rng.normal();
  std::vector<std::string> tokens;
  tokens.reserve(static_cast<std::size_t>(vocab));
  for (int i = 0; i < vocab; ++i) tokens.push_back(prefix + std::to_string(i));
  return blse::EmbeddingStore(std::move(tokens), std::move(mat), tag);
}

inline std::vector<blse::Example> random_batch(int count, int min_len, int max_len,
                                               int vocab, int classes,
                                               std::uint64_t seed,
                                               const std::string& prefix) {
  blse::Rng rng(seed);
  std::vector<blse::Example> batch(static_cast<std::size_t>(count));
  for (blse::Example& ex : batch) {
    const int len = min_len + static_cast<int>(rng.below(
                                  static_cast<std::uint64_t>(max_len - min_len + 1)));
    for (int j = 0; j < len; ++j)
      ex.tokens.push_back(prefix +
                          std::to_string(rng.below(static_cast<std::uint64_t>(vocab))));
    ex.label = static_cast<int>(rng.below(static_cast<std::uint64_t>(classes)));
  }
  return batch;
}

inline std::vector<blse::TranslationPair> aligned_pairs(int count,
                                                        const std::string& src_prefix,
                                                        const std::string& tgt_prefix) {
  std::vector<blse::TranslationPair> pairs;
  pairs.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    pairs.push_back({src_prefix + std::to_string(i), tgt_prefix + std::to_string(i)});
  return pairs;
}

inline blse::BilingualLexicon aligned_lexicon(int count, const std::string& src_prefix,
                                              const std::string& tgt_prefix) {
  blse::BilingualLexicon lex;
  lex.pairs = aligned_pairs(count, src_prefix, tgt_prefix);
  lex.dev_mask.assign(lex.pairs.size(), false);
  return lex;
}

}  // namespace testutil
