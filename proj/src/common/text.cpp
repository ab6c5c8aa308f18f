#include "ehrqa/common/text.hpp"

#include <cctype>
#include <charconv>

namespace ehrqa::text {

namespace {

bool is_space(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

bool is_wordish(const std::string& tok) {
  return !tok.empty() &&
         !(tok.size() == 1 && is_split_punct(tok[0]));
}

}  // namespace

bool is_split_punct(char c) {
  switch (c) {
    case '.':
    case ',':
    case '(':
    case ')':
    case '=':
    case '<':
    case '>':
    case '?':
    case '"':
    case '_':
    case '{':
    case '}':
      return true;
    default:
      return false;
  }
}

std::vector<Token> canonical_tokens(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (is_space(s[i])) {
      ++i;
      continue;
    }
    if (is_split_punct(s[i])) {
      out.push_back({std::string(1, s[i]), i});
      ++i;
      continue;
    }
    const std::size_t start = i;
    std::string word;
    while (i < s.size() && !is_space(s[i]) && !is_split_punct(s[i])) {
      word.push_back(static_cast<char>(
          std::tolower(static_cast<unsigned char>(s[i]))));
      ++i;
    }
    out.push_back({std::move(word), start});
  }
  return out;
}

std::vector<std::string> canonical_words(std::string_view s) {
  std::vector<std::string> out;
  for (auto& t : canonical_tokens(s)) out.push_back(std::move(t.text));
  return out;
}

std::string render_tokens(std::span<const std::string> tokens) {
  std::string out;
  bool in_quote = false;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& tok = tokens[i];
    bool space = !out.empty();
    if (i > 0) {
      const std::string& prev = tokens[i - 1];
      const bool glue_char = tok == "." || tok == "_";
      const bool prev_glue = prev == "." || prev == "_";
      if (glue_char && is_wordish(prev) && i + 1 < tokens.size() &&
          is_wordish(tokens[i + 1])) {
        space = false;
      }
      if (prev_glue && is_wordish(tok) && i >= 2 && is_wordish(tokens[i - 2])) {
        space = false;
      }
      if (prev == "?" && is_wordish(tok)) space = false;
      if (tok == ",") space = false;
      if (tok == "=" && (prev == "<" || prev == ">")) space = false;
      if (prev == "\"" && in_quote) space = false;          // after opening quote
      if (tok == "\"" && in_quote) space = false;            // closing quote
    }
    if (space) out.push_back(' ');
    out += tok;
    if (tok == "\"") in_quote = !in_quote;
  }
  return out;
}

std::string canonicalize(std::string_view s) {
  const auto words = canonical_words(s);
  return join(words, " ");
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    const std::size_t start = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    if (i > start) out.emplace_back(s.substr(start, i - start));
  }
  return out;
}

std::string join(std::span<const std::string> parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::optional<double> parse_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::size_t i = 0;
  if (s[i] == '-' || s[i] == '+') ++i;
  auto digit_run = [&] {
    const std::size_t start = i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    return i - start;
  };
  if (digit_run() == 0) return std::nullopt;
  if (i < s.size() && s[i] == '.') {
    ++i;
    if (digit_run() == 0) return std::nullopt;
  }
  if (i != s.size()) return std::nullopt;
  std::string_view body = s;
  if (body.front() == '+') body.remove_prefix(1);
  double value = 0.0;
  const auto res = std::from_chars(body.data(), body.data() + body.size(), value);
  if (res.ec != std::errc()) return std::nullopt;
  return value;
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

}  // namespace ehrqa::text
