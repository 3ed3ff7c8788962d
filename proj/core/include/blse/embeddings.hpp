#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace blse {

// Vocabulary plus dense embedding matrix for one language. Immutable after
// construction; rows are embeddings, row order matches token order.
class EmbeddingStore {
 public:
  EmbeddingStore(std::vector<std::string> tokens, Eigen::MatrixXd matrix,
                 std::string language_tag = "");

  // Text format: line 1 "<vocab> <dim>", then "<token> <f1> ... <fdim>".
  static EmbeddingStore load_text(const std::string& path,
                                  std::string language_tag = "");
  void save_text(const std::string& path) const;

  Eigen::Index size() const { return matrix_.rows(); }
  Eigen::Index dim() const { return matrix_.cols(); }
  const std::string& language_tag() const { return language_tag_; }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }

  bool contains(std::string_view token) const;
  std::optional<Eigen::Index> find(std::string_view token) const;
  // Throws when the token is absent.
  Eigen::Index row_of(std::string_view token) const;
  Eigen::MatrixXd::ConstRowXpr row(Eigen::Index i) const { return matrix_.row(i); }
  const std::string& token_at(Eigen::Index i) const { return tokens_[static_cast<std::size_t>(i)]; }

 private:
  struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const {
      return std::hash<std::string_view>{}(s);
    }
  };

  std::vector<std::string> tokens_;
  Eigen::MatrixXd matrix_;
  std::string language_tag_;
  std::unordered_map<std::string, Eigen::Index, StringHash, std::equal_to<>> index_;
};

// Mean of the in-vocabulary token embeddings. Out-of-vocabulary tokens are
// skipped; an all-OOV sentence yields the zero vector with count 0 and is
// flagged degenerate rather than raising an error.
struct SentenceVector {
  Eigen::VectorXd values;
  int known_token_count = 0;

  bool degenerate() const { return known_token_count == 0; }
};

SentenceVector average_sentence(const EmbeddingStore& store,
                                std::span<const std::string> tokens);

}  // namespace blse
