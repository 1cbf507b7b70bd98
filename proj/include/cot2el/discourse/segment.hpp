#pragma once

#include <algorithm>
#include <array>
#include <fstream>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "cot2el/core/error.hpp"
#include "cot2el/util/line_client.hpp"
#include "cot2el/util/text.hpp"

namespace cot2el {

using json = nlohmann::json;

enum class SegmentOrigin { EDU, Connective, External };

inline std::string to_string(SegmentOrigin o) {
  switch (o) {
    case SegmentOrigin::EDU: return "EDU";
    case SegmentOrigin::Connective: return "Connective";
    case SegmentOrigin::External: return "External";
  }
  return "?";
}

inline SegmentOrigin segment_origin_from_string(std::string_view s) {
  if (s == "EDU") return SegmentOrigin::EDU;
  if (s == "Connective") return SegmentOrigin::Connective;
  if (s == "External") return SegmentOrigin::External;
  throw ValidationError("unknown segment origin '" + std::string(s) + "'");
}

/// A span of the source text; `text` is always source[start, end).
struct Segment {
  std::string text;
  std::size_t start = 0;
  std::size_t end = 0;
  SegmentOrigin origin = SegmentOrigin::EDU;

  friend bool operator==(const Segment&, const Segment&) = default;
};

struct UnitSet {
  std::vector<Segment> units;
  std::string source_text;

  bool contains_text(std::string_view t) const {
    return std::any_of(units.begin(), units.end(), [&](const Segment& s) { return s.text == t; });
  }
};

namespace detail {

enum class TokKind { Word, Punct };

struct Token {
  std::size_t start;
  std::size_t end;
  TokKind kind;
};

// multi-byte punctuation: dashes, curly quotes, ellipsis
inline std::size_t utf8_punct_len(std::string_view s, std::size_t i) {
  static constexpr std::array<std::string_view, 8> kMarks = {
      "\xE2\x80\x94", "\xE2\x80\x93", "\xE2\x80\x9C", "\xE2\x80\x9D",
      "\xE2\x80\x98", "\xE2\x80\x99", "\xE2\x80\xA6", "\xE2\x80\x95"};
  for (auto m : kMarks)
    if (s.substr(i, m.size()) == m) return m.size();
  return 0;
}

inline bool is_ascii_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

inline bool is_ascii_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

/// Words plus individual punctuation marks. Apostrophes, hyphens and periods
/// between alphanumerics stay inside the word ("don't", "well-being", "3.5").
inline std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto joins = [&](std::size_t at, std::size_t len) {
    return at > 0 && at + len < s.size() && is_ascii_alnum(s[at - 1]) && is_ascii_alnum(s[at + len]);
  };
  while (i < s.size()) {
    if (text::is_space(s[i])) {
      ++i;
      continue;
    }
    if (std::size_t len = utf8_punct_len(s, i); len > 0) {
      // right single quote used as an apostrophe
      if (!(s.substr(i, len) == "\xE2\x80\x99" && joins(i, len))) {
        out.push_back({i, i + len, TokKind::Punct});
        i += len;
        continue;
      }
    }
    if (is_ascii_punct(s[i]) && !((s[i] == '\'' || s[i] == '-' || s[i] == '.') && joins(i, 1))) {
      out.push_back({i, i + 1, TokKind::Punct});
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && !text::is_space(s[j])) {
      if (std::size_t len = utf8_punct_len(s, j); len > 0) {
        if (s.substr(j, len) == "\xE2\x80\x99" && joins(j, len)) {
          j += len;
          continue;
        }
        break;
      }
      if (is_ascii_punct(s[j]) && !((s[j] == '\'' || s[j] == '-' || s[j] == '.') && joins(j, 1))) break;
      ++j;
    }
    out.push_back({i, j, TokKind::Word});
    i = j;
  }
  return out;
}

inline std::string_view tok_text(std::string_view s, const Token& t) { return s.substr(t.start, t.end - t.start); }

inline bool is_terminal(std::string_view t) { return t == "." || t == "!" || t == "?" || t == "\xE2\x80\xA6"; }

inline bool is_closer(std::string_view t) {
  return t == "\"" || t == "'" || t == ")" || t == "]" || t == "\xE2\x80\x9D" || t == "\xE2\x80\x99";
}

inline bool is_dash(std::string_view t) {
  return t == "-" || t == "\xE2\x80\x94" || t == "\xE2\x80\x93" || t == "\xE2\x80\x95";
}

inline bool is_clause_punct(std::string_view t) { return t == "," || t == ";" || t == ":" || is_dash(t); }

struct Range {
  std::size_t begin;
  std::size_t end;
};

/// Token ranges of sentences: a run of terminators (plus closing quotes or
/// brackets) ends a sentence, as does a newline. A period after a lone capital
/// letter ("B. Accomplished") is not treated as a sentence end.
inline std::vector<Range> sentences(std::string_view s, const std::vector<Token>& toks) {
  std::vector<Range> out;
  std::size_t begin = 0;
  for (std::size_t k = 0; k < toks.size(); ++k) {
    bool end_here = false;
    const auto t = tok_text(s, toks[k]);
    if (is_terminal(t)) {
      const bool initial = t == "." && k > 0 && toks[k - 1].kind == TokKind::Word &&
                           toks[k - 1].end == toks[k].start && tok_text(s, toks[k - 1]).size() == 1 &&
                           std::isupper(static_cast<unsigned char>(s[toks[k - 1].start])) &&
                           k + 1 < toks.size() && s.substr(toks[k].end, toks[k + 1].start - toks[k].end).find('\n') ==
                                                      std::string_view::npos;
      if (!initial) {
        while (k + 1 < toks.size() && toks[k + 1].start == toks[k].end &&
               (is_terminal(tok_text(s, toks[k + 1])) || is_closer(tok_text(s, toks[k + 1]))))
          ++k;
        end_here = true;
      }
    }
    if (!end_here && k + 1 < toks.size() &&
        s.substr(toks[k].end, toks[k + 1].start - toks[k].end).find('\n') != std::string_view::npos)
      end_here = true;
    if (end_here || k + 1 == toks.size()) {
      out.push_back({begin, k + 1});
      begin = k + 1;
    }
  }
  return out;
}

inline const std::unordered_set<std::string>& clause_openers() {
  static const std::unordered_set<std::string> words = {
      "and",   "but",    "or",      "so",       "yet",    "nor",     "because", "since",   "although",
      "though", "while", "whereas", "if",       "unless", "when",    "whenever", "where",  "after",
      "before", "until", "once",    "as",       "then",   "however", "therefore", "thus",  "hence",
      "even",  "especially", "whether", "otherwise", "instead", "meaning", "considering", "given"};
  return words;
}

inline std::size_t relative_clause_length(std::string_view s, const std::vector<Token>& toks, std::size_t k,
                                          std::size_t sentence_end) {
  std::size_t j = k;
  while (j < sentence_end && !is_clause_punct(tok_text(s, toks[j]))) ++j;
  return j - k;
}

}  // namespace detail

/// Rule-based clause segmentation. The result partitions the non-whitespace
/// content of `text`: consecutive segments are separated only by whitespace.
inline std::vector<Segment> segment_edus(std::string_view text) {
  using namespace detail;
  std::vector<Segment> out;
  const auto toks = tokenize(text);
  for (const auto& sent : sentences(text, toks)) {
    std::vector<std::size_t> cuts{sent.begin};
    for (std::size_t k = sent.begin + 1; k < sent.end; ++k) {
      if (toks[k].kind != TokKind::Word) continue;
      const std::string word = text::to_lower(tok_text(text, toks[k]));
      const auto prev = tok_text(text, toks[k - 1]);
      const bool after_break = prev == "," || prev == ";" || is_dash(prev);
      if (after_break && clause_openers().contains(word)) {
        cuts.push_back(k);
      } else if ((word == "that" || word == "which" || word == "who") &&
                 relative_clause_length(text, toks, k, sent.end) > 3) {
        cuts.push_back(k);
      }
    }
    cuts.push_back(sent.end);

    std::vector<Range> parts;
    for (std::size_t p = 0; p + 1 < cuts.size(); ++p) parts.push_back({cuts[p], cuts[p + 1]});
    // fragments under three tokens join their left neighbour; a leading one joins the right
    for (std::size_t p = 0; p < parts.size();) {
      if (parts.size() > 1 && parts[p].end - parts[p].begin < 3) {
        if (p == 0) {
          parts[1].begin = parts[0].begin;
          parts.erase(parts.begin());
        } else {
          parts[p - 1].end = parts[p].end;
          parts.erase(parts.begin() + static_cast<std::ptrdiff_t>(p));
        }
        continue;
      }
      ++p;
    }
    for (const auto& r : parts) {
      const std::size_t b = toks[r.begin].start;
      const std::size_t e = toks[r.end - 1].end;
      out.push_back({std::string(text.substr(b, e - b)), b, e, SegmentOrigin::EDU});
    }
  }
  return out;
}

class ConnectiveLexicon {
 public:
  explicit ConnectiveLexicon(const std::vector<std::string>& entries) {
    for (const auto& raw : entries) {
      const std::string e = text::collapse_whitespace(text::to_lower(raw));
      if (e.empty() || e.front() == '#') continue;
      entries_.insert(e);
    }
    if (entries_.empty()) throw ValidationError("connective lexicon is empty");
    for (const auto& e : entries_) max_words_ = std::max(max_words_, text::split_whitespace(e).size());
  }

  static ConnectiveLexicon load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open connective lexicon " + path);
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    return ConnectiveLexicon(lines);
  }

  static const ConnectiveLexicon& builtin() {
    static const ConnectiveLexicon lex(std::vector<std::string>{
        "accordingly", "actually", "additionally", "admittedly", "after", "after all", "afterward", "afterwards",
        "all in all", "also", "alternatively", "although", "and", "anyway", "as", "as a result", "as if",
        "as long as", "as soon as", "as though", "at least", "at the same time", "because", "before", "besides",
        "but", "by comparison", "by contrast", "by the way", "consequently", "conversely", "even if", "even so",
        "even though", "finally", "first", "for example", "for instance", "further", "furthermore", "given that",
        "hence", "however", "if", "in addition", "in any case", "in contrast", "in fact", "in other words",
        "in particular", "in short", "in sum", "in the end", "in turn", "indeed", "instead", "later", "likewise",
        "meanwhile", "moreover", "nevertheless", "next", "nonetheless", "nor", "now that", "of course",
        "on the contrary", "on the one hand", "on the other hand", "once", "or", "otherwise", "overall",
        "particularly", "previously", "rather", "regardless", "second", "similarly", "simultaneously", "since",
        "so", "so that", "specifically", "still", "subsequently", "that is", "then", "thereafter", "thereby",
        "therefore", "though", "thus", "ultimately", "unless", "until", "what's more", "when", "whenever",
        "where", "whereas", "while", "yet"});
    return lex;
  }

  bool contains(std::string_view phrase) const { return entries_.contains(std::string(phrase)); }
  const std::set<std::string>& entries() const noexcept { return entries_; }
  std::size_t max_words() const noexcept { return max_words_; }

 private:
  std::set<std::string> entries_;
  std::size_t max_words_ = 1;
};

/// Clauses opened by a lexicon connective at sentence start or after , ; : or a
/// dash. Each runs to the next clause punctuation (inclusive) or sentence end.
/// A connective set off by its own comma ("However, ...") extends past it.
inline std::vector<Segment> detect_connective_clauses(std::string_view text,
                                                      const ConnectiveLexicon& lex = ConnectiveLexicon::builtin()) {
  using namespace detail;
  std::vector<Segment> out;
  const auto toks = tokenize(text);
  for (const auto& sent : sentences(text, toks)) {
    for (std::size_t k = sent.begin; k < sent.end; ++k) {
      if (toks[k].kind != TokKind::Word) continue;
      if (k > sent.begin && !is_clause_punct(tok_text(text, toks[k - 1]))) continue;
      std::size_t matched = 0;
      std::string phrase;
      for (std::size_t n = 1; n <= lex.max_words() && k + n <= sent.end; ++n) {
        const auto& t = toks[k + n - 1];
        if (t.kind != TokKind::Word) break;
        if (n > 1) phrase += ' ';
        phrase += text::to_lower(tok_text(text, t));
        if (lex.contains(phrase)) matched = n;
      }
      if (matched == 0) continue;
      std::size_t j = k + matched;
      while (j < sent.end && !is_clause_punct(tok_text(text, toks[j]))) ++j;
      if (j == k + matched && j + 1 < sent.end) {
        ++j;
        while (j < sent.end && !is_clause_punct(tok_text(text, toks[j]))) ++j;
      }
      const std::size_t last = std::min(j, sent.end - 1);
      const std::size_t b = toks[k].start;
      const std::size_t e = toks[last].end;
      out.push_back({std::string(text.substr(b, e - b)), b, e, SegmentOrigin::Connective});
    }
  }
  return out;
}

namespace detail {

inline std::size_t leading_punct_len(std::string_view s) {
  if (s.empty()) return 0;
  if (std::size_t len = utf8_punct_len(s, 0); len > 0) return len;
  return is_ascii_punct(s.front()) ? 1 : 0;
}

inline std::size_t trailing_punct_len(std::string_view s) {
  if (s.empty()) return 0;
  if (s.size() >= 3) {
    if (std::size_t len = utf8_punct_len(s, s.size() - 3); len == 3) return 3;
  }
  return is_ascii_punct(s.back()) ? 1 : 0;
}

inline bool is_sentence_final(std::string_view p) { return p == "." || p == "!" || p == "?" || p == "\xE2\x80\xA6"; }

}  // namespace detail

/// Whitespace collapsed; leading punctuation and trailing non-final punctuation stripped.
inline std::string normalize_unit_text(std::string_view s) {
  std::string t = text::collapse_whitespace(s);
  std::string_view v = t;
  for (std::size_t n; (n = detail::leading_punct_len(v)) > 0;) v = text::trim_view(v.substr(n));
  for (std::size_t n; (n = detail::trailing_punct_len(v)) > 0;) {
    if (detail::is_sentence_final(v.substr(v.size() - n))) break;
    v = text::trim_view(v.substr(0, v.size() - n));
  }
  return std::string(v);
}

/// Dedup key: the normalized text with sentence-final punctuation also removed,
/// so a clause and the same clause ending a sentence count as one unit.
inline std::string unit_key(std::string_view s) {
  std::string n = normalize_unit_text(s);
  std::string_view v = n;
  for (std::size_t k; (k = detail::trailing_punct_len(v)) > 0;) v = text::trim_view(v.substr(0, v.size() - k));
  return std::string(v);
}

inline void validate_segment(const Segment& s, std::string_view source) {
  if (s.start >= s.end || s.end > source.size())
    throw ValidationError("segment [" + std::to_string(s.start) + ", " + std::to_string(s.end) +
                          ") out of range for source of " + std::to_string(source.size()) + " bytes");
  if (source.substr(s.start, s.end - s.start) != s.text)
    throw ValidationError("segment [" + std::to_string(s.start) + ", " + std::to_string(s.end) +
                          ") text does not match source");
}

/// Union of two segmentations: first occurrence wins per dedup key, result in
/// document order (start, then end). Nested or overlapping spans are all kept.
inline UnitSet unit_union(const std::vector<Segment>& a, const std::vector<Segment>& b, std::string_view source) {
  UnitSet u;
  u.source_text = std::string(source);
  std::unordered_set<std::string> seen;
  for (const auto* list : {&a, &b}) {
    for (const auto& s : *list) {
      validate_segment(s, source);
      std::string key = unit_key(s.text);
      if (key.empty()) continue;
      if (seen.insert(std::move(key)).second) u.units.push_back(s);
    }
  }
  std::stable_sort(u.units.begin(), u.units.end(), [](const Segment& x, const Segment& y) {
    return x.start != y.start ? x.start < y.start : x.end < y.end;
  });
  return u;
}

/// Sends {id, text} to an external segmenter and validates its spans. Span
/// edges are trimmed of whitespace; whitespace-only spans are dropped.
inline std::vector<Segment> external_segment(std::string_view text, JsonClient& client, const std::string& id = "0") {
  const json reply = client.request({{"id", id}, {"text", text}});
  if (!reply.is_object() || !reply.contains("spans") || !reply.at("spans").is_array())
    throw AdapterError("adapter protocol violation: reply lacks a spans array");
  if (reply.contains("id") && reply.at("id") != json(id))
    throw AdapterError("adapter protocol violation: reply id " + reply.at("id").dump() + " does not match request id \"" +
                       id + "\"");
  std::vector<Segment> out;
  std::size_t index = 0;
  for (const auto& span : reply.at("spans")) {
    const std::string where = "span " + std::to_string(index++);
    if (!span.is_object() || !span.contains("start") || !span.contains("end") ||
        !span.at("start").is_number_unsigned() || !span.at("end").is_number_unsigned())
      throw AdapterError("adapter protocol violation: " + where + " needs unsigned start/end: " + span.dump());
    std::size_t b = span.at("start").get<std::size_t>();
    std::size_t e = span.at("end").get<std::size_t>();
    const std::string range = where + " [" + std::to_string(b) + ", " + std::to_string(e) + ")";
    if (b >= e || e > text.size())
      throw AdapterError(range + " out of range for text of " + std::to_string(text.size()) + " bytes");
    if (!text::is_utf8_boundary(text, b) || !text::is_utf8_boundary(text, e))
      throw AdapterError(range + " splits a UTF-8 character");
    if (span.contains("text") && span.at("text").is_string() && span.at("text").get<std::string>() != text.substr(b, e - b))
      throw AdapterError(range + " text " + span.at("text").dump() + " does not match source bytes");
    while (b < e && text::is_space(text[b])) ++b;
    while (e > b && text::is_space(text[e - 1])) --e;
    if (b == e) continue;
    out.push_back({std::string(text.substr(b, e - b)), b, e, SegmentOrigin::External});
  }
  return out;
}

inline json segment_to_json(const Segment& s) {
  return {{"text", s.text}, {"start", s.start}, {"end", s.end}, {"origin", to_string(s.origin)}};
}

inline Segment segment_from_json(const json& j) {
  return {j.at("text").get<std::string>(), j.at("start").get<std::size_t>(), j.at("end").get<std::size_t>(),
          segment_origin_from_string(j.at("origin").get<std::string>())};
}

inline json unit_set_to_json(const UnitSet& u) {
  json units = json::array();
  for (const auto& s : u.units) units.push_back(segment_to_json(s));
  return {{"source_text", u.source_text}, {"units", units}};
}

inline UnitSet unit_set_from_json(const json& j) {
  UnitSet u;
  u.source_text = j.at("source_text").get<std::string>();
  for (const auto& s : j.at("units")) {
    u.units.push_back(segment_from_json(s));
    validate_segment(u.units.back(), u.source_text);
  }
  return u;
}

}  // namespace cot2el
