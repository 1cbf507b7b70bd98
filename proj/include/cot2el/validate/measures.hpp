#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "cot2el/core/error.hpp"
#include "cot2el/discourse/segment.hpp"
#include "cot2el/util/line_client.hpp"
#include "cot2el/util/text.hpp"

namespace cot2el {

using json = nlohmann::json;

/// Jaccard overlap of two n-gram sets; both empty -> 1, one empty -> 0.
template <typename T>
double jaccard(const std::set<T>& a, const std::set<T>& b) {
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  std::size_t inter = 0;
  for (const auto& x : a) inter += b.count(x);
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

inline std::set<std::string> ngram_set(const std::vector<std::string>& toks, int n) {
  std::set<std::string> out;
  const auto un = static_cast<std::size_t>(n);
  for (std::size_t i = 0; i + un <= toks.size(); ++i) {
    std::string g = toks[i];
    for (std::size_t k = 1; k < un; ++k) g += '\x1f' + toks[i + k];
    out.insert(std::move(g));
  }
  return out;
}

inline void require_order(int n) {
  if (n < 1 || n > 3) throw ValidationError("n-gram order must be 1, 2 or 3");
}

inline double lexical_similarity(std::string_view a, std::string_view b, int n) {
  require_order(n);
  return jaccard(ngram_set(text::split_whitespace(text::to_lower(a)), n),
                 ngram_set(text::split_whitespace(text::to_lower(b)), n));
}

class Tagger {
 public:
  virtual ~Tagger() = default;
  virtual std::vector<std::string> tag(std::string_view sentence) = 0;
};

/// Closed-class lexicon plus suffix and context rules over a small universal
/// tag set: DET PRON ADP CONJ AUX PART NUM PUNCT ADV ADJ VERB NOUN.
class CoarseTagger : public Tagger {
 public:
  std::vector<std::string> tag(std::string_view sentence) override {
    std::vector<std::string> tags;
    for (const auto& t : detail::tokenize(sentence)) {
      const std::string w = text::to_lower(sentence.substr(t.start, t.end - t.start));
      if (t.kind == detail::TokKind::Punct) {
        tags.emplace_back("PUNCT");
        continue;
      }
      tags.push_back(classify(w, tags.empty() ? std::string() : tags.back()));
    }
    return tags;
  }

 private:
  static std::string classify(const std::string& w, const std::string& prev) {
    static const std::unordered_map<std::string, std::string> closed = [] {
      std::unordered_map<std::string, std::string> m;
      for (auto x : {"the", "a", "an", "this", "that", "these", "those", "each", "every", "some", "any", "no",
                     "another", "both", "either", "neither", "all"})
        m[x] = "DET";
      for (auto x : {"i", "you", "he", "she", "it", "we", "they", "me", "him", "her", "us", "them", "my", "your",
                     "his", "its", "our", "their", "mine", "yours", "ours", "theirs", "myself", "yourself",
                     "himself", "herself", "itself", "themselves", "oneself", "who", "whom", "whose", "which",
                     "what", "someone", "something", "anyone", "anything", "everyone", "everything", "nothing",
                     "one", "let's", "it's", "they've", "i'm", "they're", "we're", "you're", "he's", "she's"})
        m[x] = "PRON";
      for (auto x : {"in", "on", "at", "by", "for", "with", "about", "against", "between", "into", "through",
                     "during", "before", "after", "above", "below", "to", "from", "up", "down", "of", "off",
                     "over", "under", "around", "without", "within", "like", "than", "toward", "towards",
                     "upon", "across", "behind", "beyond", "despite"})
        m[x] = "ADP";
      for (auto x : {"and", "or", "but", "nor", "yet", "so", "because", "although", "though", "while", "whereas",
                     "if", "unless", "since", "whether", "when", "where", "once", "until"})
        m[x] = "CONJ";
      for (auto x : {"is", "are", "was", "were", "be", "been", "being", "am", "have", "has", "had", "do", "does",
                     "did", "will", "would", "shall", "should", "can", "could", "may", "might", "must", "isn't",
                     "aren't", "wasn't", "weren't", "don't", "doesn't", "didn't", "won't", "wouldn't", "can't",
                     "couldn't", "shouldn't"})
        m[x] = "AUX";
      for (auto x : {"not", "n't", "'s"}) m[x] = "PART";
      for (auto x : {"very", "too", "also", "just", "only", "even", "still", "then", "now", "here", "there",
                     "maybe", "perhaps", "however", "therefore", "thus", "really", "quite", "more", "most",
                     "less", "least", "again", "often", "never", "always", "already", "probably"})
        m[x] = "ADV";
      for (auto x : {"zero", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten"}) m[x] = "NUM";
      return m;
    }();
    if (auto it = closed.find(w); it != closed.end()) return it->second;
    if (std::all_of(w.begin(), w.end(), [](unsigned char c) { return std::isdigit(c) || c == '.' || c == ','; }))
      return "NUM";
    auto ends = [&](std::string_view suf) { return w.size() > suf.size() + 1 && w.ends_with(suf); };
    if (ends("ly")) return "ADV";
    for (auto suf : {"ous", "ful", "ive", "able", "ible", "less", "ical", "ish", "ic", "al", "ant", "ent"})
      if (ends(suf)) return "ADJ";
    if (ends("ing") || ends("ed")) return "VERB";
    if (prev == "AUX" || prev == "PART") return "VERB";
    for (auto suf : {"tion", "sion", "ment", "ness", "ity", "ance", "ence", "ship", "ism"})
      if (ends(suf)) return "NOUN";
    if ((prev == "NOUN" || prev == "PRON") && w.size() > 2 && w.ends_with('s') && !w.ends_with("ss")) return "VERB";
    if (prev == "PRON") return "VERB";
    return "NOUN";
  }
};

/// Tags via an external adapter: {id, text} -> {id, tags: [...]}.
class ExternalTagger : public Tagger {
 public:
  explicit ExternalTagger(std::unique_ptr<JsonClient> client) : client_(std::move(client)) {}
  std::vector<std::string> tag(std::string_view sentence) override {
    const json reply = client_->request({{"id", std::to_string(next_id_++)}, {"text", sentence}});
    if (!reply.contains("tags") || !reply.at("tags").is_array())
      throw AdapterError("tagger protocol violation: reply lacks a tags array");
    return reply.at("tags").get<std::vector<std::string>>();
  }

 private:
  std::unique_ptr<JsonClient> client_;
  std::size_t next_id_ = 0;
};

inline double syntactic_similarity(std::string_view a, std::string_view b, int n, Tagger& tagger) {
  require_order(n);
  return jaccard(ngram_set(tagger.tag(a), n), ngram_set(tagger.tag(b), n));
}

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<double> embed(std::string_view text) = 0;
};

/// Deterministic bag-of-words embedding: lowercased alphanumeric words hashed
/// (FNV-1a) into `dim` signed buckets.
class HashingEmbedder : public Embedder {
 public:
  explicit HashingEmbedder(std::size_t dim = 256) : dim_(dim) {
    if (dim_ == 0) throw ValidationError("embedding dimension must be positive");
  }
  std::vector<double> embed(std::string_view s) override {
    std::vector<double> v(dim_, 0.0);
    std::string word;
    auto flush = [&] {
      if (word.empty()) return;
      std::uint64_t h = 1469598103934665603ULL;
      for (unsigned char c : word) h = (h ^ c) * 1099511628211ULL;
      v[h % dim_] += (h >> 63) ? -1.0 : 1.0;
      word.clear();
    };
    for (unsigned char c : s) {
      if (std::isalnum(c) || c >= 0x80 || c == '\'') word.push_back(static_cast<char>(std::tolower(c)));
      else flush();
    }
    flush();
    return v;
  }

 private:
  std::size_t dim_;
};

/// Fixed text -> vector table; unknown text is an error.
class MockEmbedder : public Embedder {
 public:
  explicit MockEmbedder(std::map<std::string, std::vector<double>> table) : table_(std::move(table)) {}
  std::vector<double> embed(std::string_view s) override {
    auto it = table_.find(std::string(s));
    if (it == table_.end()) throw AdapterError("mock embedder has no vector for \"" + std::string(s) + "\"");
    return it->second;
  }

 private:
  std::map<std::string, std::vector<double>> table_;
};

/// Embeds via an external adapter: {id, text} -> {id, vector: [...]}.
class ExternalEmbedder : public Embedder {
 public:
  explicit ExternalEmbedder(std::unique_ptr<JsonClient> client) : client_(std::move(client)) {}
  std::vector<double> embed(std::string_view s) override {
    const std::string id = std::to_string(next_id_++);
    const json reply = client_->request({{"id", id}, {"text", s}});
    if (!reply.contains("vector") || !reply.at("vector").is_array())
      throw AdapterError("embedder protocol violation: reply lacks a vector array");
    return reply.at("vector").get<std::vector<double>>();
  }

 private:
  std::unique_ptr<JsonClient> client_;
  std::size_t next_id_ = 0;
};

struct SemanticSimilarity {
  double cos = 0.0;
  double euc = 0.0;
};

/// Cosine clamped to [0,1] and 1 / (1 + Euclidean distance).
inline SemanticSimilarity semantic_from_vectors(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw AdapterError("embedding dimensions differ");
  double dot = 0.0, na = 0.0, nb = 0.0, d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
    d2 += (a[i] - b[i]) * (a[i] - b[i]);
  }
  SemanticSimilarity s;
  if (na > 0.0 && nb > 0.0) s.cos = std::clamp(dot / std::sqrt(na * nb), 0.0, 1.0);
  else s.cos = (na == 0.0 && nb == 0.0) ? 1.0 : 0.0;
  s.euc = 1.0 / (1.0 + std::sqrt(d2));
  return s;
}

inline SemanticSimilarity semantic_similarity(std::string_view a, std::string_view b, Embedder& embedder) {
  if (a == b) return {1.0, 1.0};
  return semantic_from_vectors(embedder.embed(a), embedder.embed(b));
}

inline std::size_t levenshtein_distance(const std::u32string& a, const std::u32string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    prev.swap(cur);
  }
  return prev[b.size()];
}

/// 1 - lev(a, b) / max(|a|, |b|) over code points; both empty -> 1.
inline double levenshtein_ratio(std::string_view a, std::string_view b) {
  const auto ua = text::utf8_decode(a);
  const auto ub = text::utf8_decode(b);
  const std::size_t m = std::max(ua.size(), ub.size());
  if (m == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein_distance(ua, ub)) / static_cast<double>(m);
}

}  // namespace cot2el
