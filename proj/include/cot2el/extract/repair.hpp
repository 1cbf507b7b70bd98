#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "cot2el/core/error.hpp"
#include "cot2el/util/text.hpp"

namespace cot2el {

using json = nlohmann::json;

namespace detail {

inline std::string drop_trailing_commas(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      out.push_back(c);
      if (escaped) escaped = false;
      else if (c == '\\') escaped = true;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == ',') {
      std::size_t j = i + 1;
      while (j < s.size() && text::is_space(s[j])) ++j;
      if (j < s.size() && (s[j] == ']' || s[j] == '}')) continue;
    }
    out.push_back(c);
  }
  return out;
}

inline std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

inline std::string normalize_smart_quotes(std::string s) {
  for (const char* q : {"\xE2\x80\x9C", "\xE2\x80\x9D", "\xE2\x80\x9E", "\xE2\x80\x9F"}) s = replace_all(std::move(s), q, "\"");
  for (const char* q : {"\xE2\x80\x98", "\xE2\x80\x99", "\xE2\x80\x9A", "\xE2\x80\x9B"}) s = replace_all(std::move(s), q, "'");
  return s;
}

}  // namespace detail

/// Turns a model's structured-output reply into a JSON document: code fences
/// and surrounding prose are cut away at the outermost braces, trailing commas
/// are removed, and smart quotes are straightened if the plain form fails.
inline json repair_el_document(std::string_view raw) {
  if (text::trim_view(raw).empty()) throw ValidationError("unstructurable: empty document");
  const auto open = raw.find('{');
  const auto close = raw.rfind('}');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open)
    throw ValidationError("unstructurable: no brace-delimited object (offset 0)");
  const std::string body(raw.substr(open, close - open + 1));

  std::size_t failure_offset = 0;
  for (int pass = 0; pass < 2; ++pass) {
    std::string candidate = detail::drop_trailing_commas(pass == 0 ? body : detail::normalize_smart_quotes(body));
    try {
      return json::parse(candidate);
    } catch (const json::parse_error& e) {
      // first-pass offsets are in `raw` coordinates, less any dropped trailing commas
      if (pass == 0) failure_offset = open + (e.byte > 0 ? e.byte - 1 : 0);
    }
  }
  throw ValidationError("unstructurable: syntax error at offset " + std::to_string(failure_offset));
}

}  // namespace cot2el
