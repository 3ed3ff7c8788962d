#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace blse {

// Binary labels: 0 = negative, 1 = positive.
// Four-class labels ascend from negativity to positivity:
// 0 = strong negative, 1 = negative, 2 = positive, 3 = strong positive.
enum class Scheme { Binary, FourClass };

enum class Split { Train, Dev, Test };

inline int class_count(Scheme scheme) { return scheme == Scheme::Binary ? 2 : 4; }

struct Example {
  std::vector<std::string> tokens;  // lowercased, whitespace-tokenized, non-empty
  int label = 0;
  Split split = Split::Train;
};

struct LabeledCorpus {
  Scheme scheme = Scheme::Binary;
  std::vector<Example> examples;

  int class_count() const { return blse::class_count(scheme); }
  std::vector<long long> label_counts() const;
  std::vector<std::size_t> split_indices(Split split) const;
  std::size_t split_size(Split split) const { return split_indices(split).size(); }
};

// TSV "label<TAB>text" lines; labels {0,1} for binary, {0,1,2,3} for 4-class.
// Text is lowercased and whitespace-tokenized. All examples start in Train.
LabeledCorpus load_corpus(const std::string& path, Scheme scheme);
// Writes one split (or all examples when split is not given).
void save_corpus(const LabeledCorpus& corpus, const std::string& path);
void save_corpus_split(const LabeledCorpus& corpus, Split split,
                       const std::string& path);

// Merges strong and weak classes: {0,1} -> negative, {2,3} -> positive.
LabeledCorpus to_binary(const LabeledCorpus& corpus);

// Stratified 70/20/10 train/test/dev assignment, deterministic per seed.
LabeledCorpus split_corpus(const LabeledCorpus& corpus, std::uint64_t seed);

}  // namespace blse
