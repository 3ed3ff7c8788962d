#include <Eigen/Dense>
#include <string>
#include <vector>

#include "blse/embeddings.hpp"
#include "blse/util.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace blse;

TEST_CASE("text round-trip preserves every bit") {
  testutil::TempDir tmp("emb");
  const EmbeddingStore store = testutil::random_store(30, 7, 5, "w", "xx");
  store.save_text(tmp.path("e.txt"));
  const EmbeddingStore loaded = EmbeddingStore::load_text(tmp.path("e.txt"), "xx");
  REQUIRE(loaded.size() == store.size());
  REQUIRE(loaded.dim() == store.dim());
  CHECK(loaded.tokens() == store.tokens());
  CHECK(testutil::same_bits(loaded.matrix(), store.matrix()));
  CHECK(loaded.language_tag() == "xx");
}

TEST_CASE("lookup helpers agree") {
  const EmbeddingStore store = testutil::random_store(5, 3, 1, "w");
  CHECK(store.contains("w2"));
  CHECK_FALSE(store.contains("nope"));
  REQUIRE(store.find("w4").has_value());
  CHECK(*store.find("w4") == store.row_of("w4"));
  CHECK_FALSE(store.find("absent").has_value());
  CHECK_THROWS(store.row_of("absent"));
  CHECK(store.token_at(store.row_of("w3")) == "w3");
}

TEST_CASE("constructor validates shapes and duplicates") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
  CHECK_THROWS(EmbeddingStore({"a"}, m));
  CHECK_THROWS(EmbeddingStore({"a", "a"}, m));
  CHECK_NOTHROW(EmbeddingStore({"a", "b"}, m));
}

TEST_CASE("load_text rejects malformed files") {
  testutil::TempDir tmp("emb_bad");
  write_file(tmp.path("short.txt"), "2 3\na 1 2 3\n");
  CHECK_THROWS(EmbeddingStore::load_text(tmp.path("short.txt")));
  write_file(tmp.path("width.txt"), "1 3\na 1 2\n");
  CHECK_THROWS(EmbeddingStore::load_text(tmp.path("width.txt")));
  write_file(tmp.path("dup.txt"), "2 2\na 1 2\na 3 4\n");
  CHECK_THROWS(EmbeddingStore::load_text(tmp.path("dup.txt")));
  write_file(tmp.path("num.txt"), "1 2\na 1 x\n");
  CHECK_THROWS(EmbeddingStore::load_text(tmp.path("num.txt")));
}

TEST_CASE("average_sentence means known rows and skips OOV") {
  Eigen::MatrixXd m(3, 2);
  m << 1.0, 2.0, 3.0, 4.0, 10.0, 20.0;
  const EmbeddingStore store({"a", "b", "c"}, m);

  const std::vector<std::string> tokens = {"a", "zzz", "c"};
  const SentenceVector v = average_sentence(store, tokens);
  CHECK_FALSE(v.degenerate());
  CHECK(v.known_token_count == 2);
  CHECK(v.values(0) == doctest::Approx(5.5));
  CHECK(v.values(1) == doctest::Approx(11.0));

  const std::vector<std::string> gone = {"x", "y"};
  const SentenceVector d = average_sentence(store, gone);
  CHECK(d.degenerate());
  CHECK(d.values.size() == 2);
  CHECK(d.values.norm() == 0.0);

  // Repeated tokens count once per occurrence.
  const std::vector<std::string> rep = {"a", "a", "b"};
  const SentenceVector r = average_sentence(store, rep);
  CHECK(r.known_token_count == 3);
  CHECK(r.values(0) == doctest::Approx((1.0 + 1.0 + 3.0) / 3.0));
}
