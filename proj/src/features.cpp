#include "peranno/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "peranno/error.hpp"

namespace peranno {

namespace {

// Decodes one UTF-8 code point starting at `pos`; advances `pos`. Malformed
// bytes decode to U+FFFD one byte at a time, which keeps the tokenizer total
// and deterministic on arbitrary input.
char32_t decode_utf8(std::string_view s, std::size_t& pos) {
  const auto byte = [&](std::size_t i) {
    return static_cast<unsigned char>(s[i]);
  };
  const unsigned char b0 = byte(pos);
  if (b0 < 0x80) {
    pos += 1;
    return b0;
  }
  int len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    pos += 1;
    return 0xFFFD;
  }
  if (pos + len > s.size()) {
    pos += 1;
    return 0xFFFD;
  }
  for (int i = 1; i < len; ++i) {
    if ((byte(pos + i) & 0xC0) != 0x80) {
      pos += 1;
      return 0xFFFD;
    }
    cp = (cp << 6) | (byte(pos + i) & 0x3F);
  }
  pos += len;
  return cp;
}

void encode_utf8(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_whitespace(char32_t cp) {
  switch (cp) {
    case 0x0009:
    case 0x000A:
    case 0x000B:
    case 0x000C:
    case 0x000D:
    case 0x0020:
    case 0x0085:
    case 0x00A0:
    case 0x1680:
    case 0x2028:
    case 0x2029:
    case 0x202F:
    case 0x205F:
    case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

// Punctuation stripped from token edges. Covers ASCII, Latin-1 punctuation,
// the general-punctuation block, Arabic punctuation and CJK stops.
bool is_strippable_punct(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
           (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
  }
  switch (cp) {
    case 0x00A1:  // inverted exclamation
    case 0x00A7:
    case 0x00AB:
    case 0x00B6:
    case 0x00B7:
    case 0x00BB:
    case 0x00BF:  // inverted question
    case 0x060C:  // arabic comma
    case 0x061B:  // arabic semicolon
    case 0x061F:  // arabic question mark
    case 0x066A:
    case 0x066B:
    case 0x066C:
    case 0x066D:
    case 0x06D4:  // arabic full stop
    case 0x3001:  // ideographic comma
    case 0x3002:  // ideographic full stop
      return true;
    default:
      return (cp >= 0x2010 && cp <= 0x2027) || (cp >= 0x2030 && cp <= 0x205E);
  }
}

// Simple case folding over the common bicameral ranges. Anything outside
// these ranges passes through unchanged; repeated folding is a fixed point.
char32_t fold_case(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  if (cp >= 0x00C0 && cp <= 0x00DE && cp != 0x00D7) return cp + 0x20;
  if (cp == 0x0178) return 0x00FF;  // capital Y with diaeresis
  if (cp == 0x017F) return 0x0073;  // long s
  if (cp >= 0x0100 && cp <= 0x0137) return (cp % 2 == 0) ? cp + 1 : cp;
  if (cp >= 0x0139 && cp <= 0x0148) return (cp % 2 == 1) ? cp + 1 : cp;
  if (cp >= 0x014A && cp <= 0x0177) return (cp % 2 == 0) ? cp + 1 : cp;
  if (cp >= 0x0179 && cp <= 0x017E) return (cp % 2 == 1) ? cp + 1 : cp;
  if (cp >= 0x0391 && cp <= 0x03A9 && cp != 0x03A2) return cp + 0x20;  // greek
  if (cp >= 0x0410 && cp <= 0x042F) return cp + 0x20;   // cyrillic
  if (cp >= 0x0400 && cp <= 0x040F) return cp + 0x50;   // cyrillic extras
  if (cp >= 0xFF21 && cp <= 0xFF3A) return cp + 0x20;   // fullwidth latin
  return cp;
}

}  // namespace

double SparseVector::l2_norm() const {
  double sq = 0.0;
  for (const auto& [i, v] : entries) sq += v * v;
  return std::sqrt(sq);
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::vector<char32_t> current;
  const auto flush = [&]() {
    if (current.empty()) return;
    std::size_t begin = 0;
    std::size_t end = current.size();
    while (begin < end && is_strippable_punct(current[begin])) ++begin;
    while (end > begin && is_strippable_punct(current[end - 1])) --end;
    if (begin < end) {
      std::string token;
      for (std::size_t i = begin; i < end; ++i) encode_utf8(current[i], token);
      tokens.push_back(std::move(token));
    }
    current.clear();
  };

  std::size_t pos = 0;
  while (pos < text.size()) {
    const char32_t cp = decode_utf8(text, pos);
    if (is_whitespace(cp)) {
      flush();
    } else {
      current.push_back(fold_case(cp));
    }
  }
  flush();
  return tokens;
}

Vocabulary Vocabulary::build(const std::vector<std::string>& train_texts,
                             int min_df) {
  if (train_texts.empty()) {
    throw Error("build_vocabulary: empty training corpus");
  }
  if (min_df < 1) {
    throw Error("build_vocabulary: min_df must be >= 1");
  }
  std::map<std::string, std::int64_t> df;  // ordered -> lexicographic indices
  std::vector<std::string> doc_terms;
  for (const auto& text : train_texts) {
    doc_terms.clear();
    for (auto& tok : tokenize(text)) doc_terms.push_back(std::move(tok));
    std::sort(doc_terms.begin(), doc_terms.end());
    doc_terms.erase(std::unique(doc_terms.begin(), doc_terms.end()),
                    doc_terms.end());
    for (const auto& term : doc_terms) ++df[term];
  }
  Vocabulary vocab;
  vocab.num_docs_ = static_cast<std::int64_t>(train_texts.size());
  for (const auto& [term, count] : df) {
    if (count >= min_df) {
      vocab.index_.emplace(term, static_cast<int>(vocab.terms_.size()));
      vocab.terms_.push_back(term);
      vocab.dfs_.push_back(count);
    }
  }
  return vocab;
}

std::optional<int> Vocabulary::index_of(const std::string& term) const {
  const auto it = index_.find(term);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::string Vocabulary::to_text() const {
  std::ostringstream os;
  os << "# n_docs=" << num_docs_ << "\n";
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    os << terms_[i] << "\t" << dfs_[i] << "\n";
  }
  return os.str();
}

Vocabulary Vocabulary::from_text(const std::string& text) {
  Vocabulary vocab;
  std::istringstream is(text);
  std::string line;
  bool saw_ndocs = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find("n_docs=");
      if (eq != std::string::npos) {
        vocab.num_docs_ = std::stoll(line.substr(eq + 7));
        saw_ndocs = true;
      }
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error("vocabulary: malformed line: " + line);
    }
    std::string term = line.substr(0, tab);
    vocab.index_.emplace(term, static_cast<int>(vocab.terms_.size()));
    vocab.terms_.push_back(std::move(term));
    vocab.dfs_.push_back(std::stoll(line.substr(tab + 1)));
  }
  if (!saw_ndocs) {
    throw Error("vocabulary: missing n_docs header");
  }
  return vocab;
}

namespace {

SparseVector count_terms(const std::vector<std::string>& tokens,
                         const Vocabulary& vocab) {
  std::map<int, double> counts;
  for (const auto& tok : tokens) {
    if (const auto idx = vocab.index_of(tok)) counts[*idx] += 1.0;
  }
  SparseVector vec;
  vec.dim = vocab.size();
  vec.entries.assign(counts.begin(), counts.end());
  return vec;
}

}  // namespace

SparseVector tfidf_vectorize(const std::vector<std::string>& tokens,
                             const Vocabulary& vocab) {
  SparseVector vec = count_terms(tokens, vocab);
  const double n = static_cast<double>(vocab.num_docs());
  for (auto& [idx, weight] : vec.entries) {
    const double idf =
        std::log((1.0 + n) / (1.0 + static_cast<double>(vocab.df(idx)))) + 1.0;
    weight *= idf;
  }
  const double norm = vec.l2_norm();
  if (norm > 0.0) {
    for (auto& [idx, weight] : vec.entries) weight /= norm;
  }
  return vec;
}

SparseVector bow_vectorize(const std::vector<std::string>& tokens,
                           const Vocabulary& vocab) {
  return count_terms(tokens, vocab);
}

}  // namespace peranno
