#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "blse/embeddings.hpp"

namespace blse {

// Skip-gram with negative sampling. Single-threaded so that a fixed seed
// reproduces the matrix bit for bit.
struct SgnsConfig {
  int dim = 100;
  int window = 5;
  int negative = 15;
  int epochs = 5;
  double learning_rate = 0.025;
  double subsample = 1e-4;  // 0 disables subsampling
  int min_count = 5;
  std::uint64_t seed = 1;
  std::string language_tag;
};

EmbeddingStore train_sgns(const std::vector<std::vector<std::string>>& corpus,
                          const SgnsConfig& config);

}  // namespace blse
