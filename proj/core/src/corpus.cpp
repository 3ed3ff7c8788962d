#include "blse/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "blse/rng.hpp"
#include "blse/util.hpp"

namespace blse {
namespace {

std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace

std::vector<long long> LabeledCorpus::label_counts() const {
  std::vector<long long> counts(static_cast<std::size_t>(class_count()), 0);
  for (const auto& example : examples) ++counts[static_cast<std::size_t>(example.label)];
  return counts;
}

std::vector<std::size_t> LabeledCorpus::split_indices(Split split) const {
  std::vector<std::size_t> indices;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (examples[i].split == split) indices.push_back(i);
  }
  return indices;
}

LabeledCorpus load_corpus(const std::string& path, Scheme scheme) {
  std::ifstream in(path);
  require(in.good(), "cannot open corpus file: " + path);

  LabeledCorpus corpus;
  corpus.scheme = scheme;
  const int classes = class_count(scheme);

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = strip_cr(raw);
    if (line.empty()) continue;
    std::size_t tab = line.find('\t');
    require(tab != std::string_view::npos,
            "corpus line " + std::to_string(line_no) + " has no tab: " + path);
    std::string_view label_text = line.substr(0, tab);
    std::string_view text = line.substr(tab + 1);

    long long label = -1;
    require(try_parse_long(label_text, label) && label >= 0 && label < classes,
            "unknown label symbol \"" + std::string(label_text) + "\" on line " +
                std::to_string(line_no) + ": " + path);

    std::string lowered = to_lower_ascii(text);
    auto fields = split_whitespace(lowered);
    require(!fields.empty(),
            "empty text on corpus line " + std::to_string(line_no) + ": " + path);

    Example example;
    example.label = static_cast<int>(label);
    example.tokens.reserve(fields.size());
    for (auto field : fields) example.tokens.emplace_back(field);
    corpus.examples.push_back(std::move(example));
  }
  require(!corpus.examples.empty(), "corpus file has no examples: " + path);
  return corpus;
}

void save_corpus(const LabeledCorpus& corpus, const std::string& path) {
  std::ostringstream out;
  for (const auto& example : corpus.examples) {
    out << example.label << '\t';
    for (std::size_t i = 0; i < example.tokens.size(); ++i) {
      if (i > 0) out << ' ';
      out << example.tokens[i];
    }
    out << '\n';
  }
  write_file(path, out.str());
}

void save_corpus_split(const LabeledCorpus& corpus, Split split,
                       const std::string& path) {
  LabeledCorpus view;
  view.scheme = corpus.scheme;
  for (const auto& example : corpus.examples) {
    if (example.split == split) view.examples.push_back(example);
  }
  save_corpus(view, path);
}

LabeledCorpus to_binary(const LabeledCorpus& corpus) {
  require(corpus.scheme == Scheme::FourClass, "to_binary: corpus is already binary");
  LabeledCorpus result;
  result.scheme = Scheme::Binary;
  result.examples = corpus.examples;
  for (auto& example : result.examples) example.label = example.label <= 1 ? 0 : 1;
  return result;
}

LabeledCorpus split_corpus(const LabeledCorpus& corpus, std::uint64_t seed) {
  require(corpus.examples.size() >= 10, "split_corpus: need at least 10 examples");

  // Per-class index pools for stratification.
  std::vector<std::vector<std::size_t>> pools(
      static_cast<std::size_t>(corpus.class_count()));
  for (std::size_t i = 0; i < corpus.examples.size(); ++i) {
    pools[static_cast<std::size_t>(corpus.examples[i].label)].push_back(i);
  }

  LabeledCorpus result = corpus;
  Rng rng(seed);
  for (std::size_t cls = 0; cls < pools.size(); ++cls) {
    auto& pool = pools[cls];
    if (pool.empty()) continue;
    require(pool.size() >= 3, "split_corpus: class " + std::to_string(cls) +
                                  " has fewer than 3 examples; cannot stratify");
    rng.shuffle(pool);
    const auto n = pool.size();
    auto test = static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(n)));
    auto dev = static_cast<std::size_t>(std::llround(0.1 * static_cast<double>(n)));
    test = std::max<std::size_t>(test, 1);
    dev = std::max<std::size_t>(dev, 1);
    // train is the remainder, so train + test + dev == n per class
    for (std::size_t i = 0; i < n; ++i) {
      Split split = Split::Train;
      if (i < test) split = Split::Test;
      else if (i < test + dev) split = Split::Dev;
      result.examples[pool[i]].split = split;
    }
  }
  return result;
}

}  // namespace blse
