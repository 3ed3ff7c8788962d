#include <string>
#include <vector>

#include "blse/corpus.hpp"
#include "blse/util.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace blse;

TEST_CASE("load_corpus parses, lowercases and tokenizes") {
  testutil::TempDir tmp("corpus");
  write_file(tmp.path("c.tsv"), "1\tGood Movie\n0\tBAD   one\n\n1\tokay\r\n");
  const LabeledCorpus corpus = load_corpus(tmp.path("c.tsv"), Scheme::Binary);
  REQUIRE(corpus.examples.size() == 3);
  CHECK(corpus.examples[0].tokens == std::vector<std::string>{"good", "movie"});
  CHECK(corpus.examples[1].tokens == std::vector<std::string>{"bad", "one"});
  CHECK(corpus.examples[1].label == 0);
  CHECK(corpus.examples[2].tokens == std::vector<std::string>{"okay"});
  for (const Example& ex : corpus.examples) CHECK(ex.split == Split::Train);
}

TEST_CASE("load_corpus rejects malformed lines") {
  testutil::TempDir tmp("corpus_bad");
  write_file(tmp.path("label.tsv"), "2\ttext\n");
  CHECK_THROWS(load_corpus(tmp.path("label.tsv"), Scheme::Binary));
  CHECK_NOTHROW(load_corpus(tmp.path("label.tsv"), Scheme::FourClass));
  write_file(tmp.path("notab.tsv"), "1 text\n");
  CHECK_THROWS(load_corpus(tmp.path("notab.tsv"), Scheme::Binary));
  write_file(tmp.path("empty_text.tsv"), "1\t \n");
  CHECK_THROWS(load_corpus(tmp.path("empty_text.tsv"), Scheme::Binary));
  write_file(tmp.path("symbol.tsv"), "pos\ttext\n");
  CHECK_THROWS_WITH(load_corpus(tmp.path("symbol.tsv"), Scheme::Binary),
                    doctest::Contains("unknown label symbol"));
  write_file(tmp.path("none.tsv"), "\n");
  CHECK_THROWS(load_corpus(tmp.path("none.tsv"), Scheme::Binary));
}

TEST_CASE("save and reload is the identity on content") {
  testutil::TempDir tmp("corpus_rt");
  LabeledCorpus corpus;
  corpus.scheme = Scheme::FourClass;
  corpus.examples = {{{"alpha", "beta"}, 3, Split::Train}, {{"gamma"}, 0, Split::Dev}};
  save_corpus(corpus, tmp.path("c.tsv"));
  const LabeledCorpus loaded = load_corpus(tmp.path("c.tsv"), Scheme::FourClass);
  REQUIRE(loaded.examples.size() == 2);
  CHECK(loaded.examples[0].tokens == corpus.examples[0].tokens);
  CHECK(loaded.examples[0].label == 3);
  CHECK(loaded.examples[1].label == 0);
}

TEST_CASE("save_corpus_split writes only the split") {
  testutil::TempDir tmp("corpus_split");
  LabeledCorpus corpus;
  corpus.examples = {{{"a"}, 0, Split::Train},
                     {{"b"}, 1, Split::Dev},
                     {{"c"}, 1, Split::Train}};
  save_corpus_split(corpus, Split::Train, tmp.path("train.tsv"));
  const LabeledCorpus loaded = load_corpus(tmp.path("train.tsv"), Scheme::Binary);
  REQUIRE(loaded.examples.size() == 2);
  CHECK(loaded.examples[0].tokens[0] == "a");
  CHECK(loaded.examples[1].tokens[0] == "c");
}

TEST_CASE("to_binary merges strong and weak classes") {
  LabeledCorpus corpus;
  corpus.scheme = Scheme::FourClass;
  for (int label = 0; label < 4; ++label)
    corpus.examples.push_back({{"w"}, label, Split::Train});
  const LabeledCorpus merged = to_binary(corpus);
  CHECK(merged.scheme == Scheme::Binary);
  CHECK(merged.examples[0].label == 0);
  CHECK(merged.examples[1].label == 0);
  CHECK(merged.examples[2].label == 1);
  CHECK(merged.examples[3].label == 1);
  CHECK_THROWS(to_binary(merged));
}

TEST_CASE("to_binary reproduces the published per-class merges") {
  // Count vectors (strong neg, neg, pos, strong pos) -> (neg, pos).
  struct Case {
    std::vector<int> four;
    long long neg, pos;
  };
  const Case cases[] = {{{218, 38, 370, 846}, 256, 1216},
                        {{153, 20, 384, 572}, 173, 956}};
  for (const Case& c : cases) {
    LabeledCorpus corpus;
    corpus.scheme = Scheme::FourClass;
    for (int label = 0; label < 4; ++label)
      for (int i = 0; i < c.four[static_cast<std::size_t>(label)]; ++i)
        corpus.examples.push_back({{"w"}, label, Split::Train});
    const auto counts = to_binary(corpus).label_counts();
    CHECK(counts[0] == c.neg);
    CHECK(counts[1] == c.pos);
  }
}

TEST_CASE("split_corpus stratifies 70/20/10 deterministically") {
  LabeledCorpus corpus;
  corpus.scheme = Scheme::Binary;
  for (int i = 0; i < 60; ++i) corpus.examples.push_back({{"w"}, 0, Split::Train});
  for (int i = 0; i < 40; ++i) corpus.examples.push_back({{"w"}, 1, Split::Train});

  const LabeledCorpus split = split_corpus(corpus, 5);
  const LabeledCorpus again = split_corpus(corpus, 5);
  for (std::size_t i = 0; i < split.examples.size(); ++i)
    CHECK(split.examples[i].split == again.examples[i].split);

  CHECK(split.split_size(Split::Train) == 70);
  CHECK(split.split_size(Split::Test) == 20);
  CHECK(split.split_size(Split::Dev) == 10);

  // Per-class proportions hold as well.
  int test0 = 0;
  for (std::size_t i = 0; i < 60; ++i)
    if (split.examples[i].split == Split::Test) ++test0;
  CHECK(test0 == 12);

  const LabeledCorpus other = split_corpus(corpus, 6);
  bool differs = false;
  for (std::size_t i = 0; i < split.examples.size(); ++i)
    differs = differs || split.examples[i].split != other.examples[i].split;
  CHECK(differs);
}

TEST_CASE("label_counts and split_indices") {
  LabeledCorpus corpus;
  corpus.scheme = Scheme::Binary;
  corpus.examples = {{{"a"}, 1, Split::Dev}, {{"b"}, 1, Split::Train}, {{"c"}, 0, Split::Dev}};
  const auto counts = corpus.label_counts();
  CHECK(counts[0] == 1);
  CHECK(counts[1] == 2);
  const auto dev = corpus.split_indices(Split::Dev);
  REQUIRE(dev.size() == 2);
  CHECK(dev[0] == 0);
  CHECK(dev[1] == 2);
}
