#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace blse {

struct TranslationPair {
  std::string source;
  std::string target;
};

// Ordered source->target word pairs. Duplicates are preserved (a source word
// may carry several translations); multi-word entries never enter the list.
// dev_mask marks the held-out pairs used only for cosine monitoring.
struct BilingualLexicon {
  std::vector<TranslationPair> pairs;
  std::vector<bool> dev_mask;        // same length as pairs; all-false until split
  int dropped_multiword = 0;         // load-time warning count

  std::size_t size() const { return pairs.size(); }
  std::vector<TranslationPair> train_pairs() const;
  std::vector<TranslationPair> dev_pairs() const;
};

// File format: UTF-8, one "source<TAB>target" pair per line, no header.
BilingualLexicon load_lexicon(const std::string& path);
void save_lexicon(const BilingualLexicon& lexicon, const std::string& path);

// Marks a deterministic dev holdout of roughly `fraction` pairs (at least one,
// and at least one pair stays in train).
BilingualLexicon split_dev(const BilingualLexicon& lexicon, double fraction,
                           std::uint64_t seed);

}  // namespace blse
