#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ehrqa::text {

// Characters that always form a standalone token. Shared by the subword
// tokenizer, the query lexers and the logical-form metric so that all of
// them agree on what a token is.
bool is_split_punct(char c);

struct Token {
  std::string text;
  std::size_t offset = 0;  // byte offset of the token in the source string
};

// Lowercase, split on whitespace, then split punctuation into standalone
// tokens.
std::vector<Token> canonical_tokens(std::string_view s);
std::vector<std::string> canonical_words(std::string_view s);

// Inverse of canonical_words for query text: single spaces, except that `.`
// and `_` glue identifier parts, quoted literals hug their quotes, `?` hugs a
// following variable name and `,` hugs its left neighbour.
std::string render_tokens(std::span<const std::string> tokens);

// Canonical single-spaced form; equal iff canonical_words are equal.
std::string canonicalize(std::string_view s);

std::string to_lower(std::string_view s);
std::vector<std::string> split_whitespace(std::string_view s);
std::string join(std::span<const std::string> parts, std::string_view sep);
std::string trim(std::string_view s);

// Plain decimal number: optional sign, digits, optional fraction.
std::optional<double> parse_number(std::string_view s);

bool starts_with(std::string_view s, std::string_view prefix);

}  // namespace ehrqa::text
