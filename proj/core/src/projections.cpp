#include "blse/projections.hpp"

#include <string>
#include <unordered_map>
#include <vector>

#include "blse/rng.hpp"
#include "blse/util.hpp"

namespace blse {

LinearMap solve_least_squares_map(const EmbeddingStore& S, const EmbeddingStore& T,
                                  std::span<const TranslationPair> pairs,
                                  bool orthogonal) {
  std::vector<const TranslationPair*> covered;
  for (const TranslationPair& p : pairs)
    if (S.contains(p.source) && T.contains(p.target)) covered.push_back(&p);
  require(!covered.empty(), "least squares map: no pair is covered by both stores");

  const Eigen::Index n = static_cast<Eigen::Index>(covered.size());
  Eigen::MatrixXd Sp(n, S.dim()), Tp(n, T.dim());
  for (Eigen::Index i = 0; i < n; ++i) {
    Sp.row(i) = S.row(S.row_of(covered[static_cast<size_t>(i)]->source));
    Tp.row(i) = T.row(T.row_of(covered[static_cast<size_t>(i)]->target));
  }

  LinearMap map;
  map.pairs_used = static_cast<int>(n);
  if (orthogonal) {
    require(S.dim() == T.dim(), "least squares map: orthogonal fit needs equal dims");
    Eigen::MatrixXd C = Sp.transpose() * Tp;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(C, Eigen::ComputeFullU | Eigen::ComputeFullV);
    map.W = svd.matrixU() * svd.matrixV().transpose();
  } else {
    map.W = Sp.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(Tp);
  }
  map.residual = (Sp * map.W - Tp).squaredNorm() / static_cast<double>(n);
  return map;
}

EmbeddingStore project_source(const EmbeddingStore& S, const LinearMap& map) {
  require(map.W.rows() == S.dim(), "project_source: map rows do not match the store dim");
  return EmbeddingStore(S.tokens(), S.matrix() * map.W, S.language_tag());
}

LabeledCorpus make_pseudo_bilingual(const LabeledCorpus& source,
                                    const LabeledCorpus& target,
                                    const BilingualLexicon& lexicon,
                                    std::uint64_t seed) {
  require(source.scheme == target.scheme,
          "pseudo-bilingual corpus: label schemes differ");

  // Direction-aware translation tables, duplicates collapsed, first-seen
  // order kept so draws are reproducible.
  std::unordered_map<std::string, std::vector<std::string>> fwd, bwd;
  auto add = [](std::unordered_map<std::string, std::vector<std::string>>& table,
                const std::string& key, const std::string& value) {
    auto& alts = table[key];
    for (const std::string& a : alts)
      if (a == value) return;
    alts.push_back(value);
  };
  for (const TranslationPair& p : lexicon.train_pairs()) {
    add(fwd, p.source, p.target);
    add(bwd, p.target, p.source);
  }
  require(!fwd.empty(), "pseudo-bilingual corpus: lexicon has no training pairs");

  Rng rng(seed);
  LabeledCorpus mixed;
  mixed.scheme = source.scheme;
  mixed.examples.reserve(source.examples.size() + target.examples.size());

  auto mix = [&](const LabeledCorpus& corpus,
                 const std::unordered_map<std::string, std::vector<std::string>>& table) {
    for (const Example& ex : corpus.examples) {
      Example out = ex;
      for (std::string& tok : out.tokens) {
        auto it = table.find(tok);
        if (it == table.end()) continue;
        if (!rng.bernoulli(0.5)) continue;
        const auto& alts = it->second;
        tok = alts.size() == 1 ? alts[0] : alts[rng.below(alts.size())];
      }
      mixed.examples.push_back(std::move(out));
    }
  };
  mix(source, fwd);
  mix(target, bwd);
  return mixed;
}

}  // namespace blse
