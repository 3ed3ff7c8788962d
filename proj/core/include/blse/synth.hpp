#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "blse/corpus.hpp"
#include "blse/embeddings.hpp"
#include "blse/lexicon.hpp"

namespace blse {

// Synthetic bilingual sentiment world: target vectors are a rotated, noised
// copy of the source vectors, labels derive from a hidden sentiment
// direction, and a lexicon covers a configurable vocabulary fraction. Every
// artifact persists to the standard file formats, so the rest of the system
// consumes it exactly like real data.
struct SynthConfig {
  int vocab = 2000;
  int dim = 50;
  int train_sentences = 2000;
  int dev_sentences = 400;
  int test_sentences = 400;
  int min_len = 5;
  int max_len = 15;
  int classes = 2;  // 2 or 4
  double noise_sigma = 0.01;
  double lexicon_coverage = 0.3;
  // Token sampling tilt: sentences draw a latent polarity and prefer tokens
  // whose sentiment score matches it. 0 gives uniform sampling, but then
  // co-occurrence carries no sentiment and corpus-only methods cannot learn
  // the labels.
  double polarity_bias = 2.0;
  std::uint64_t seed = 1;
};

struct SynthWorld {
  SynthConfig config;
  EmbeddingStore source;
  EmbeddingStore target;
  BilingualLexicon lexicon;
  LabeledCorpus source_corpus;
  LabeledCorpus target_corpus;
  // Target corpus with every token replaced by its exact source equivalent;
  // stands in for machine-translated text.
  LabeledCorpus target_translated;
  Eigen::MatrixXd rotation;             // d x d orthogonal
  Eigen::VectorXd sentiment_direction;  // unit vector, length d
  // Strongest-scoring tokens per polarity, for cosine diagnostics.
  std::vector<std::string> source_positive;
  std::vector<std::string> source_negative;
  std::vector<std::string> target_positive;
  std::vector<std::string> target_negative;
};

SynthWorld generate(const SynthConfig& config);

// Writes every artifact under dir (created if missing) using the standard
// formats; returns the written paths.
std::vector<std::string> save_world(const SynthWorld& world, const std::string& dir);

}  // namespace blse
