#include "blse/embeddings.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "blse/util.hpp"

namespace blse {

EmbeddingStore::EmbeddingStore(std::vector<std::string> tokens,
                               Eigen::MatrixXd matrix, std::string language_tag)
    : tokens_(std::move(tokens)),
      matrix_(std::move(matrix)),
      language_tag_(std::move(language_tag)) {
  require(matrix_.rows() >= 1, "embedding store needs at least one row");
  require(matrix_.cols() >= 1, "embedding store needs at least one dimension");
  require(static_cast<Eigen::Index>(tokens_.size()) == matrix_.rows(),
          "token count does not match matrix rows");
  require(matrix_.allFinite(), "embedding matrix contains non-finite values");
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    auto [it, inserted] = index_.emplace(tokens_[i], static_cast<Eigen::Index>(i));
    (void)it;
    require(inserted, "duplicate token in embedding store: " + tokens_[i]);
  }
}

EmbeddingStore EmbeddingStore::load_text(const std::string& path,
                                         std::string language_tag) {
  std::ifstream in(path);
  require(in.good(), "cannot open embedding file: " + path);

  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "empty embedding file: " + path);
  auto header = split_whitespace(line);
  long long vocab = 0, dim = 0;
  require(header.size() == 2 && try_parse_long(header[0], vocab) &&
              try_parse_long(header[1], dim) && vocab >= 1 && dim >= 1,
          "malformed embedding header (expected \"<vocab> <dim>\"): " + path);

  std::vector<std::string> tokens;
  tokens.reserve(static_cast<std::size_t>(vocab));
  Eigen::MatrixXd matrix(vocab, dim);

  for (long long r = 0; r < vocab; ++r) {
    require(static_cast<bool>(std::getline(in, line)),
            "embedding file ends early at row " + std::to_string(r) + ": " + path);
    auto fields = split_whitespace(line);
    require(static_cast<long long>(fields.size()) == dim + 1,
            "embedding row arity mismatch at row " + std::to_string(r) + " (got " +
                std::to_string(fields.size()) + " fields, expected " +
                std::to_string(dim + 1) + "): " + path);
    tokens.emplace_back(fields[0]);
    for (long long c = 0; c < dim; ++c) {
      double value = 0.0;
      require(try_parse_double(fields[static_cast<std::size_t>(c + 1)], value),
              "unparsable embedding value at row " + std::to_string(r) + ": " + path);
      require(std::isfinite(value),
              "non-finite embedding value at row " + std::to_string(r) + ": " + path);
      matrix(r, c) = value;
    }
  }
  return EmbeddingStore(std::move(tokens), std::move(matrix), std::move(language_tag));
}

void EmbeddingStore::save_text(const std::string& path) const {
  std::ostringstream out;
  out << size() << ' ' << dim() << '\n';
  for (Eigen::Index r = 0; r < size(); ++r) {
    out << tokens_[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < dim(); ++c) out << ' ' << format_g17(matrix_(r, c));
    out << '\n';
  }
  write_file(path, out.str());
}

bool EmbeddingStore::contains(std::string_view token) const {
  return index_.find(token) != index_.end();
}

std::optional<Eigen::Index> EmbeddingStore::find(std::string_view token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Eigen::Index EmbeddingStore::row_of(std::string_view token) const {
  auto it = index_.find(token);
  require(it != index_.end(), "token not in embedding store: " + std::string(token));
  return it->second;
}

SentenceVector average_sentence(const EmbeddingStore& store,
                                std::span<const std::string> tokens) {
  require(!tokens.empty(), "average_sentence: empty token list");
  SentenceVector result;
  result.values = Eigen::VectorXd::Zero(store.dim());
  for (const std::string& token : tokens) {
    if (auto row = store.find(token)) {
      result.values += store.row(*row).transpose();
      ++result.known_token_count;
    }
  }
  if (result.known_token_count > 0) result.values /= result.known_token_count;
  return result;
}

}  // namespace blse
