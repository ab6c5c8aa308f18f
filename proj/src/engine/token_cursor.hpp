#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "ehrqa/common/error.hpp"
#include "ehrqa/common/text.hpp"
#include "ehrqa/engine/sql.hpp"

namespace ehrqa::detail {

// Cursor over canonical tokens shared by the SQL and SPARQL parsers. Both
// grammars are defined on canonical tokens, so any two strings with the same
// canonical form parse identically.
class TokenCursor {
 public:
  explicit TokenCursor(std::string_view source)
      : source_(source), tokens_(text::canonical_tokens(source)) {}

  bool at_end() const { return pos_ >= tokens_.size(); }
  std::size_t index() const { return pos_; }

  const std::string& peek(std::size_t ahead = 0) const {
    static const std::string empty;
    return pos_ + ahead < tokens_.size() ? tokens_[pos_ + ahead].text : empty;
  }

  std::size_t offset() const {
    return at_end() ? source_.size() : tokens_[pos_].offset;
  }

  bool accept(std::string_view word) {
    if (!at_end() && tokens_[pos_].text == word) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(std::string_view word) {
    if (!accept(word)) {
      fail("expected '" + std::string(word) + "'" + found());
    }
  }

  std::string next() {
    if (at_end()) fail("unexpected end of query");
    return tokens_[pos_++].text;
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw SyntaxError(message, offset());
  }

  std::string found() const {
    return at_end() ? " but reached end of query"
                    : " but found '" + peek() + "'";
  }

  static bool is_alnum_word(const std::string& w) {
    if (w.empty()) return false;
    for (char c : w) {
      if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9'))) return false;
    }
    return true;
  }

  // word ('_' word)*
  std::string identifier(std::string_view what,
                         const std::vector<std::string_view>& reserved) {
    const std::string& head = peek();
    if (!is_alnum_word(head)) fail("expected " + std::string(what) + found());
    for (auto r : reserved) {
      if (head == r) fail("expected " + std::string(what) + found());
    }
    std::string out = next();
    while (peek() == "_" && is_alnum_word(peek(1))) {
      ++pos_;
      out += "_" + next();
    }
    return out;
  }

  // '"' token* '"'  |  number ('.' digits)?
  Literal literal() {
    Literal lit;
    lit.token_begin = pos_;
    if (accept("\"")) {
      std::vector<std::string> inner;
      while (!at_end() && peek() != "\"") inner.push_back(next());
      if (at_end()) fail("unterminated string literal");
      ++pos_;
      lit.value = text::render_tokens(inner);
      lit.quoted = true;
    } else {
      std::string num = peek();
      if (!text::parse_number(num)) fail("expected a literal value" + found());
      ++pos_;
      if (peek() == "." && is_digits(peek(1))) {
        ++pos_;
        num += "." + next();
      }
      lit.value = num;
      lit.quoted = false;
    }
    lit.token_end = pos_;
    return lit;
  }

 private:
  static bool is_digits(const std::string& w) {
    if (w.empty()) return false;
    for (char c : w) {
      if (c < '0' || c > '9') return false;
    }
    return true;
  }

  std::string_view source_;
  std::vector<text::Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace ehrqa::detail
