#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "blse/corpus.hpp"
#include "blse/embeddings.hpp"
#include "blse/lexicon.hpp"

namespace blse {

// Linear map W from the source embedding space into the target space,
// fit on lexicon pairs.
struct LinearMap {
  Eigen::MatrixXd W;  // d x d'
  int pairs_used = 0;
  double residual = 0.0;  // mean squared error over the fitting pairs
};

// Least-squares fit of min_W ||S'W - T'||_F^2 over the covered lexicon
// pairs (minimum-norm solution via SVD). With orthogonal set, W is instead
// the orthogonal Procrustes solution U V^T of S'^T T'; that requires
// d == d'.
LinearMap solve_least_squares_map(const EmbeddingStore& S, const EmbeddingStore& T,
                                  std::span<const TranslationPair> pairs,
                                  bool orthogonal = false);

// Applies W to every source vector, yielding a store in the target space
// with the source tokens.
EmbeddingStore project_source(const EmbeddingStore& S, const LinearMap& map);

// Corpus-level mixing: concatenates both corpora and replaces each lexicon
// token occurrence with one of its translations with probability 1/2
// (uniform among several). Labels and splits are kept; training SGNS on the
// result gives a shared space without any vector-level mapping.
LabeledCorpus make_pseudo_bilingual(const LabeledCorpus& source,
                                    const LabeledCorpus& target,
                                    const BilingualLexicon& lexicon,
                                    std::uint64_t seed);

}  // namespace blse
