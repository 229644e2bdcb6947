#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace peranno {

// Sparse feature vector: strictly increasing indices, no explicit zeros.
struct SparseVector {
  std::vector<std::pair<std::int32_t, double>> entries;
  std::int32_t dim = 0;

  double l2_norm() const;
};

// Deterministic tokenizer: case-folds, splits on whitespace, strips leading
// and trailing punctuation per token, drops empty tokens. Pure byte-level
// UTF-8 handling, no locale involvement, so output is platform-independent.
std::vector<std::string> tokenize(std::string_view text);

// Term -> feature index mapping built from the training split only.
// Indices are assigned in lexicographic (byte) order of the terms.
class Vocabulary {
 public:
  Vocabulary() = default;

  // Keeps terms whose document frequency is >= min_df. Throws on an empty
  // corpus; a corpus of empty documents yields an empty vocabulary.
  static Vocabulary build(const std::vector<std::string>& train_texts,
                          int min_df = 1);

  int size() const { return static_cast<int>(terms_.size()); }
  std::int64_t num_docs() const { return num_docs_; }
  std::optional<int> index_of(const std::string& term) const;
  const std::string& term(int index) const { return terms_[index]; }
  std::int64_t df(int index) const { return dfs_[index]; }

  // Plain-text form: header comments, then one "term<TAB>df" line per term.
  std::string to_text() const;
  static Vocabulary from_text(const std::string& text);

 private:
  std::vector<std::string> terms_;
  std::vector<std::int64_t> dfs_;
  std::unordered_map<std::string, int> index_;
  std::int64_t num_docs_ = 0;
};

// weight(t) = tf(t) * (ln((1 + N) / (1 + df(t))) + 1), L2-normalized when
// the vector is nonempty. Out-of-vocabulary tokens are ignored.
SparseVector tfidf_vectorize(const std::vector<std::string>& tokens,
                             const Vocabulary& vocab);

// Raw term counts, no normalization.
SparseVector bow_vectorize(const std::vector<std::string>& tokens,
                           const Vocabulary& vocab);

}  // namespace peranno
