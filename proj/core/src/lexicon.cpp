#include "blse/lexicon.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "blse/rng.hpp"
#include "blse/util.hpp"

namespace blse {
namespace {

bool has_inner_whitespace(std::string_view token) {
  return token.find(' ') != std::string_view::npos ||
         token.find('\t') != std::string_view::npos;
}

std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace

std::vector<TranslationPair> BilingualLexicon::train_pairs() const {
  std::vector<TranslationPair> out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (dev_mask.empty() || !dev_mask[i]) out.push_back(pairs[i]);
  }
  return out;
}

std::vector<TranslationPair> BilingualLexicon::dev_pairs() const {
  std::vector<TranslationPair> out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!dev_mask.empty() && dev_mask[i]) out.push_back(pairs[i]);
  }
  return out;
}

BilingualLexicon load_lexicon(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open lexicon file: " + path);

  BilingualLexicon lexicon;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = strip_cr(raw);
    if (line.empty()) continue;
    std::size_t tab = line.find('\t');
    require(tab != std::string_view::npos &&
                line.find('\t', tab + 1) == std::string_view::npos,
            "lexicon line " + std::to_string(line_no) +
                " does not have exactly one tab: " + path);
    std::string_view source = line.substr(0, tab);
    std::string_view target = line.substr(tab + 1);
    require(!source.empty() && !target.empty(),
            "lexicon line " + std::to_string(line_no) + " has an empty side: " + path);
    if (has_inner_whitespace(source) || has_inner_whitespace(target)) {
      ++lexicon.dropped_multiword;  // multi-word expressions are excluded
      continue;
    }
    lexicon.pairs.push_back({std::string(source), std::string(target)});
  }
  require(!lexicon.pairs.empty(),
          "lexicon is empty after filtering multi-word entries: " + path);
  lexicon.dev_mask.assign(lexicon.pairs.size(), false);
  return lexicon;
}

void save_lexicon(const BilingualLexicon& lexicon, const std::string& path) {
  std::ostringstream out;
  for (const auto& pair : lexicon.pairs) out << pair.source << '\t' << pair.target << '\n';
  write_file(path, out.str());
}

BilingualLexicon split_dev(const BilingualLexicon& lexicon, double fraction,
                           std::uint64_t seed) {
  require(fraction > 0.0 && fraction < 1.0, "split_dev: fraction must be in (0,1)");
  require(lexicon.size() >= 2, "split_dev: need at least two pairs");

  const std::size_t n = lexicon.size();
  auto dev_count = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(n)));
  dev_count = std::clamp<std::size_t>(dev_count, 1, n - 1);

  Rng rng(seed);
  auto order = shuffled_indices(n, rng);

  BilingualLexicon result = lexicon;
  result.dev_mask.assign(n, false);
  for (std::size_t i = 0; i < dev_count; ++i) result.dev_mask[order[i]] = true;
  return result;
}

}  // namespace blse
