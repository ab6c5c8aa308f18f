#include "ehrqa/tokenizer/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ehrqa/common/error.hpp"
#include "ehrqa/common/text.hpp"

namespace ehrqa {

Vocab::Vocab() {
  for (const char* s : {"[PAD]", "[UNK]", "[SEP]", "[MASK]"}) add(s);
}

std::optional<TokenId> Vocab::id_of(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocab::token_of(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw UnknownId("token id " + std::to_string(id) + " outside vocabulary of " +
                    std::to_string(tokens_.size()));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

TokenId Vocab::add(std::string_view token) {
  if (auto id = id_of(token)) return *id;
  const auto id = static_cast<TokenId>(tokens_.size());
  tokens_.emplace_back(token);
  ids_.emplace(tokens_.back(), id);
  return id;
}

std::string Vocab::format() const {
  std::string out;
  for (const auto& t : tokens_) {
    out += t;
    out += '\n';
  }
  return out;
}

Vocab Vocab::parse(std::string_view content) {
  Vocab v;
  std::size_t line_no = 0, start = 0;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    start = end + 1;
    const std::size_t idx = line_no++;
    if (idx < static_cast<std::size_t>(kNumSpecial)) {
      if (line != v.tokens_[idx]) {
        throw ParseError("vocab line " + std::to_string(idx + 1) + ": expected " +
                         v.tokens_[idx]);
      }
      continue;
    }
    if (line.empty() || line.find_first_of(" \t") != std::string_view::npos) {
      throw ParseError("vocab line " + std::to_string(idx + 1) + ": bad token");
    }
    if (v.id_of(line)) {
      throw ParseError("vocab line " + std::to_string(idx + 1) + ": duplicate token '" +
                       std::string(line) + "'");
    }
    v.add(line);
  }
  if (line_no < static_cast<std::size_t>(kNumSpecial)) {
    throw ParseError("vocab file lacks the special tokens");
  }
  return v;
}

void Vocab::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << format();
}

Vocab Vocab::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

namespace {

std::string merged_text(const std::string& left, const std::string& right) {
  return left + right.substr(kContinuation.size());
}

}  // namespace

Vocab train_vocab(const std::vector<std::string>& texts, int target_size,
                  std::uint64_t /*seed*/) {
  // Learning is deterministic without randomness (ties break lexically);
  // the seed is accepted for interface symmetry with the other trainers.
  std::map<std::string, long long> word_freq;
  for (const auto& t : texts) {
    for (auto& w : text::canonical_words(t)) ++word_freq[w];
  }
  if (word_freq.empty()) throw EmptyCorpus("no words to learn a vocabulary from");

  std::set<char> chars;
  for (const auto& [w, f] : word_freq) chars.insert(w.begin(), w.end());
  if (target_size < static_cast<int>(chars.size()) + kNumSpecial) {
    throw InvalidArgument("target_size " + std::to_string(target_size) +
                          " is below character count + 4 (" +
                          std::to_string(chars.size() + kNumSpecial) + ")");
  }

  Vocab v;
  for (char c : chars) v.add(std::string(1, c));
  for (char c : chars) {
    if (!text::is_split_punct(c)) v.add(std::string(kContinuation) + c);
  }

  struct Word {
    std::vector<std::string> symbols;
    long long freq;
  };
  std::vector<Word> words;
  for (const auto& [w, f] : word_freq) {
    Word word{{}, f};
    for (std::size_t i = 0; i < w.size(); ++i) {
      word.symbols.push_back(i == 0 ? std::string(1, w[i])
                                    : std::string(kContinuation) + w[i]);
    }
    words.push_back(std::move(word));
  }

  while (static_cast<int>(v.size()) < target_size) {
    std::map<std::pair<std::string, std::string>, long long> counts;
    for (const auto& w : words) {
      for (std::size_t i = 0; i + 1 < w.symbols.size(); ++i) {
        counts[{w.symbols[i], w.symbols[i + 1]}] += w.freq;
      }
    }
    // std::map iterates pairs in lexicographic order, so the first maximum
    // is the tie-break winner.
    const std::pair<std::string, std::string>* best = nullptr;
    long long best_count = 1;
    for (const auto& [pair, count] : counts) {
      if (count > best_count) {
        best = &pair;
        best_count = count;
      }
    }
    if (!best) break;
    const std::string left = best->first, right = best->second;
    const std::string merged = merged_text(left, right);
    v.add(merged);
    for (auto& w : words) {
      std::vector<std::string> out;
      out.reserve(w.symbols.size());
      for (std::size_t i = 0; i < w.symbols.size(); ++i) {
        if (i + 1 < w.symbols.size() && w.symbols[i] == left &&
            w.symbols[i + 1] == right) {
          out.push_back(merged);
          ++i;
        } else {
          out.push_back(std::move(w.symbols[i]));
        }
      }
      w.symbols = std::move(out);
    }
  }
  return v;
}

std::vector<TokenId> encode_word(const Vocab& v, std::string_view word) {
  std::vector<TokenId> out;
  std::size_t pos = 0;
  std::string candidate;
  while (pos < word.size()) {
    std::optional<TokenId> found;
    std::size_t len = word.size() - pos;
    for (; len > 0; --len) {
      candidate.clear();
      if (pos > 0) candidate += kContinuation;
      candidate.append(word.substr(pos, len));
      found = v.id_of(candidate);
      if (found) break;
    }
    if (!found || v.is_special(*found)) return {kUnk};
    out.push_back(*found);
    pos += len;
  }
  return out;
}

std::vector<TokenId> encode(const Vocab& v, std::string_view text) {
  std::vector<TokenId> out;
  for (const auto& w : text::canonical_words(text)) {
    const auto ids = encode_word(v, w);
    out.insert(out.end(), ids.begin(), ids.end());
  }
  return out;
}

std::string decode(const Vocab& v, std::span<const TokenId> ids,
                   bool keep_specials) {
  std::string out;
  for (TokenId id : ids) {
    const std::string& tok = v.token_of(id);
    if (v.is_special(id) && !keep_specials) continue;
    if (!v.is_special(id) && text::starts_with(tok, kContinuation) && !out.empty() &&
        out.back() != ' ') {
      out.append(tok, kContinuation.size());
      continue;
    }
    if (!out.empty()) out.push_back(' ');
    out += text::starts_with(tok, kContinuation) && !v.is_special(id)
               ? tok.substr(kContinuation.size())
               : tok;
  }
  return out;
}

std::string decode_query(const Vocab& v, std::span<const TokenId> ids) {
  const auto words = text::split_whitespace(decode(v, ids));
  return text::render_tokens(words);
}

}  // namespace ehrqa
