#include <doctest.h>

#include <cmath>

#include "peranno/error.hpp"
#include "peranno/features.hpp"
#include "peranno/rng.hpp"

using namespace peranno;

TEST_CASE("tokenize strips edge punctuation and folds case") {
  CHECK(tokenize("Yes.") == std::vector<std::string>{"yes"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("Don't GO!") == std::vector<std::string>{"don't", "go"});
  CHECK(tokenize("  multiple   spaces\tand\nnewlines ") ==
        std::vector<std::string>{"multiple", "spaces", "and", "newlines"});
  CHECK(tokenize("...") .empty());
  CHECK(tokenize("(bracketed)") == std::vector<std::string>{"bracketed"});
}

TEST_CASE("tokenize handles non-ascii text deterministically") {
  // Arabic has no case; punctuation still strips.
  CHECK(tokenize("مرحبا؟") ==
        std::vector<std::string>{"مرحبا"});
  // Latin-1 uppercase folds.
  CHECK(tokenize("Été") == std::vector<std::string>{"été"});
  // Cyrillic uppercase folds.
  CHECK(tokenize("МИР") ==
        std::vector<std::string>{"мир"});
  // Unicode spaces split; curly quotes strip.
  CHECK(tokenize("a b “c”") ==
        std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("tokenize is idempotent over its own joined output") {
  Rng rng(11);
  const std::string alphabet = "abcXYZ' ..,!?\t()-Éé";
  std::vector<std::string> pieces;
  {
    // Split the alphabet into code points once.
    std::string cur;
    for (char c : alphabet) {
      if ((c & 0xC0) != 0x80) {
        if (!cur.empty()) pieces.push_back(cur);
        cur.clear();
      }
      cur += c;
    }
    pieces.push_back(cur);
  }
  for (int trial = 0; trial < 200; ++trial) {
    std::string text;
    const int len = static_cast<int>(rng.bounded(40));
    for (int i = 0; i < len; ++i) {
      text += pieces[rng.bounded(pieces.size())];
    }
    const auto once = tokenize(text);
    std::string joined;
    for (std::size_t i = 0; i < once.size(); ++i) {
      if (i > 0) joined += ' ';
      joined += once[i];
    }
    CHECK(tokenize(joined) == once);
  }
}

TEST_CASE("vocabulary keeps terms by document frequency") {
  const std::vector<std::string> docs = {"a b", "a c"};
  const auto v1 = Vocabulary::build(docs, 1);
  REQUIRE(v1.size() == 3);
  CHECK(v1.term(0) == "a");
  CHECK(v1.term(1) == "b");
  CHECK(v1.term(2) == "c");
  CHECK(v1.df(0) == 2);
  CHECK(v1.df(1) == 1);
  CHECK(v1.num_docs() == 2);

  const auto v2 = Vocabulary::build(docs, 2);
  REQUIRE(v2.size() == 1);
  CHECK(v2.term(0) == "a");
}

TEST_CASE("vocabulary boundary cases") {
  CHECK_THROWS_AS(Vocabulary::build({}, 1), Error);
  const auto empty = Vocabulary::build({"", "..."}, 1);
  CHECK(empty.size() == 0);
}

TEST_CASE("vocabulary text round trip") {
  const auto vocab = Vocabulary::build({"a b", "a c", "b d e"}, 1);
  const auto copy = Vocabulary::from_text(vocab.to_text());
  REQUIRE(copy.size() == vocab.size());
  CHECK(copy.num_docs() == vocab.num_docs());
  for (int i = 0; i < vocab.size(); ++i) {
    CHECK(copy.term(i) == vocab.term(i));
    CHECK(copy.df(i) == vocab.df(i));
  }
  CHECK(copy.to_text() == vocab.to_text());
}

TEST_CASE("tfidf matches the stated formula") {
  // Corpus: "a a b" and "a c"; N = 2, df(a) = 2, df(b) = df(c) = 1.
  const auto vocab = Vocabulary::build({"a a b", "a c"}, 1);
  const auto vec = tfidf_vectorize(tokenize("a a b"), vocab);
  REQUIRE(vec.entries.size() == 2);

  const double idf_a = std::log((1.0 + 2.0) / (1.0 + 2.0)) + 1.0;  // = 1
  const double idf_b = std::log((1.0 + 2.0) / (1.0 + 1.0)) + 1.0;
  const double wa = 2.0 * idf_a;
  const double wb = 1.0 * idf_b;
  const double norm = std::sqrt(wa * wa + wb * wb);
  CHECK(vec.entries[0].first == 0);
  CHECK(vec.entries[0].second == doctest::Approx(wa / norm).epsilon(1e-12));
  CHECK(vec.entries[1].second == doctest::Approx(wb / norm).epsilon(1e-12));
  CHECK(idf_a == 1.0);
}

TEST_CASE("tfidf of out-of-vocabulary text is the zero vector") {
  const auto vocab = Vocabulary::build({"a b"}, 1);
  CHECK(tfidf_vectorize(tokenize("z q"), vocab).entries.empty());
  CHECK(tfidf_vectorize({}, vocab).entries.empty());
}

TEST_CASE("nonempty tfidf vectors have unit norm") {
  Rng rng(5);
  const std::vector<std::string> docs = {"a b c", "b c d", "c d e a",
                                         "e f g", "a g"};
  const auto vocab = Vocabulary::build(docs, 1);
  for (int trial = 0; trial < 100; ++trial) {
    std::string text;
    const int len = 1 + static_cast<int>(rng.bounded(8));
    for (int i = 0; i < len; ++i) {
      text += static_cast<char>('a' + rng.bounded(7));
      text += ' ';
    }
    const auto vec = tfidf_vectorize(tokenize(text), vocab);
    if (vec.entries.empty()) continue;
    CHECK(std::abs(vec.l2_norm() - 1.0) < 1e-9);
  }
}

TEST_CASE("features depend only on the train split") {
  const std::vector<std::string> train = {"a b c", "c d"};
  const auto base = Vocabulary::build(train, 1);
  // A vocabulary is a pure function of the training texts; dev/test content
  // has no channel into it or into idf weights.
  const auto again = Vocabulary::build(train, 1);
  CHECK(base.to_text() == again.to_text());
  const auto vec1 = tfidf_vectorize(tokenize("a c"), base);
  const auto vec2 = tfidf_vectorize(tokenize("a c"), again);
  CHECK(vec1.entries == vec2.entries);
}

TEST_CASE("bow vectors are raw counts") {
  const auto vocab = Vocabulary::build({"a b", "a c"}, 1);
  const auto vec = bow_vectorize(tokenize("a a b"), vocab);
  REQUIRE(vec.entries.size() == 2);
  CHECK(vec.entries[0] == std::pair<std::int32_t, double>{0, 2.0});
  CHECK(vec.entries[1] == std::pair<std::int32_t, double>{1, 1.0});
  CHECK(bow_vectorize({}, vocab).entries.empty());
  CHECK(bow_vectorize(tokenize("z z"), vocab).entries.empty());
}
