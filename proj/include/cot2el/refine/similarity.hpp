#pragma once

#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "cot2el/util/text.hpp"

namespace cot2el {

namespace detail {

struct Match {
  std::size_t a;
  std::size_t b;
  std::size_t size;
};

/// Longest common block of a[alo,ahi) and b[blo,bhi); ties go to the smallest
/// start in a, then in b. No junk handling.
class LongestMatcher {
 public:
  LongestMatcher(const std::u32string& a, const std::u32string& b)
      : a_(a), b_(b), row_(b.size() + 1, 0), next_(b.size() + 1, 0) {
    for (std::size_t j = 0; j < b.size(); ++j) b2j_[b[j]].push_back(j);
  }

  Match find(std::size_t alo, std::size_t ahi, std::size_t blo, std::size_t bhi) {
    Match best{alo, blo, 0};
    // row_[j + 1] = length of the match ending at (i - 1, j)
    std::vector<std::size_t> touched;
    std::vector<std::size_t> next_touched;
    for (std::size_t i = alo; i < ahi; ++i) {
      next_touched.clear();
      if (auto it = b2j_.find(a_[i]); it != b2j_.end()) {
        for (std::size_t j : it->second) {
          if (j < blo) continue;
          if (j >= bhi) break;
          const std::size_t k = row_[j] + 1;
          next_[j + 1] = k;
          next_touched.push_back(j + 1);
          if (k > best.size) best = {i + 1 - k, j + 1 - k, k};
        }
      }
      for (std::size_t t : touched) row_[t] = 0;
      for (std::size_t t : next_touched) row_[t] = next_[t], next_[t] = 0;
      touched.swap(next_touched);
    }
    for (std::size_t t : touched) row_[t] = 0;
    return best;
  }

 private:
  const std::u32string& a_;
  const std::u32string& b_;
  std::unordered_map<char32_t, std::vector<std::size_t>> b2j_;
  std::vector<std::size_t> row_;
  std::vector<std::size_t> next_;
};

inline std::size_t matched_characters(const std::u32string& a, const std::u32string& b) {
  LongestMatcher m(a, b);
  std::size_t total = 0;
  std::vector<std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>> queue{{0, a.size(), 0, b.size()}};
  while (!queue.empty()) {
    auto [alo, ahi, blo, bhi] = queue.back();
    queue.pop_back();
    const Match x = m.find(alo, ahi, blo, bhi);
    if (x.size == 0) continue;
    total += x.size;
    if (alo < x.a && blo < x.b) queue.emplace_back(alo, x.a, blo, x.b);
    if (x.a + x.size < ahi && x.b + x.size < bhi) queue.emplace_back(x.a + x.size, ahi, x.b + x.size, bhi);
  }
  return total;
}

}  // namespace detail

/// Gestalt pattern-matching ratio 2M / (|a| + |b|) over code points after
/// whitespace collapse. Case-sensitive. Two empty strings compare as 1.
inline double similarity_ratio(std::string_view a, std::string_view b) {
  const auto ua = text::utf8_decode(text::collapse_whitespace(a));
  const auto ub = text::utf8_decode(text::collapse_whitespace(b));
  const std::size_t total = ua.size() + ub.size();
  if (total == 0) return 1.0;
  return 2.0 * static_cast<double>(detail::matched_characters(ua, ub)) / static_cast<double>(total);
}

}  // namespace cot2el
