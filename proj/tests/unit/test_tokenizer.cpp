#include <doctest.h>

#include <filesystem>
#include <algorithm>
#include <map>
#include <set>

#include "ehrqa/common/error.hpp"
#include "ehrqa/common/text.hpp"
#include "ehrqa/corpus/corpus.hpp"
#include "ehrqa/tokenizer/vocab.hpp"

using namespace ehrqa;

namespace {

std::vector<std::string> corpus_texts(int n) {
  Database db = generate_database(1, Scale::tiny);
  std::vector<std::string> texts;
  for (const auto& p : generate_pairs(db, default_templates(), n, 4)) {
    texts.push_back(p.question);
    texts.push_back(p.sql);
  }
  return texts;
}

// Plain re-statement of the merge rule for a single word list, used as an
// oracle: returns the merged token strings in learning order.
std::vector<std::string> oracle_merges(const std::vector<std::string>& words, int max_merges) {
  std::vector<std::vector<std::string>> seqs;
  for (const auto& w : words) {
    std::vector<std::string> s;
    for (std::size_t i = 0; i < w.size(); ++i) {
      s.push_back((i ? "##" : "") + std::string(1, w[i]));
    }
    seqs.push_back(s);
  }
  std::vector<std::string> merges;
  for (int k = 0; k < max_merges; ++k) {
    std::map<std::pair<std::string, std::string>, int> c;
    for (const auto& s : seqs) {
      for (std::size_t i = 0; i + 1 < s.size(); ++i) c[{s[i], s[i + 1]}]++;
    }
    std::pair<std::string, std::string> best;
    int best_n = 1;
    for (const auto& [p, n] : c) {
      if (n > best_n) {
        best = p;
        best_n = n;
      }
    }
    if (best_n < 2) break;
    const std::string m = best.first + best.second.substr(2);
    merges.push_back(m);
    for (auto& s : seqs) {
      std::vector<std::string> out;
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (i + 1 < s.size() && s[i] == best.first && s[i + 1] == best.second) {
          out.push_back(m);
          ++i;
        } else {
          out.push_back(s[i]);
        }
      }
      s = out;
    }
  }
  return merges;
}

}  // namespace

TEST_CASE("single-string corpus: hand-run merges") {
  Vocab v = train_vocab({"aaaa"}, 100, 0);
  // a, ##a, then (##a, ##a) occurs twice and becomes ##aa; after that no
  // pair occurs twice.
  REQUIRE(v.size() == 7);
  CHECK(v.token_of(4) == "a");
  CHECK(v.token_of(5) == "##a");
  CHECK(v.token_of(6) == "##aa");
  auto ids = encode(v, "aaaa");
  CHECK(ids == std::vector<TokenId>{4, 6, 5});
  CHECK(ids.size() <= 3);
}

TEST_CASE("merge order matches an independent oracle") {
  const std::vector<std::string> words = {"ferrous", "ferrous", "ferric", "sulfate",
                                          "gluconate", "sulfur", "fer"};
  std::string joined;
  for (const auto& w : words) joined += w + " ";
  Vocab v = train_vocab({joined}, 1000, 0);
  auto merges = oracle_merges(words, 1000);
  std::set<char> chars(joined.begin(), joined.end());
  chars.erase(' ');
  const std::size_t base = kNumSpecial + 2 * chars.size();
  REQUIRE(v.size() >= base);
  std::vector<std::string> learned;
  for (std::size_t i = base; i < v.size(); ++i) learned.push_back(v.token_of(static_cast<TokenId>(i)));
  // The vocabulary skips merges whose text already exists.
  std::vector<std::string> unique_merges;
  for (const auto& m : merges) {
    if (std::find(unique_merges.begin(), unique_merges.end(), m) == unique_merges.end()) {
      unique_merges.push_back(m);
    }
  }
  CHECK(learned == unique_merges);
}

TEST_CASE("special ids are fixed") {
  Vocab v = train_vocab({"hello world"}, 50, 0);
  CHECK(v.token_of(kPad) == "[PAD]");
  CHECK(v.token_of(kUnk) == "[UNK]");
  CHECK(v.token_of(kSep) == "[SEP]");
  CHECK(v.token_of(kMask) == "[MASK]");
}

TEST_CASE("retraining gives identical vocab bytes") {
  auto texts = corpus_texts(100);
  CHECK(train_vocab(texts, 400, 1).format() == train_vocab(texts, 400, 1).format());
}

TEST_CASE("vocab file round trip") {
  Vocab v = train_vocab(corpus_texts(50), 300, 1);
  auto path = std::filesystem::temp_directory_path() / "ehrqa_vocab.txt";
  v.save(path);
  CHECK(Vocab::load(path) == v);
  CHECK_THROWS_AS(Vocab::parse("[PAD]\n[UNK]\nx\n"), ParseError);
}

TEST_CASE("encode edge cases") {
  Vocab v = train_vocab({"abc"}, 50, 0);
  CHECK(encode(v, "").empty());
  CHECK(encode(v, "   ").empty());
  CHECK(encode(v, "xyz") == std::vector<TokenId>{kUnk});
  CHECK(encode(v, "ab xyz") == std::vector<TokenId>{*v.id_of("a"), *v.id_of("##b"), kUnk});
  CHECK(encode(v, "ABC") == encode(v, "abc"));
}

TEST_CASE("empty corpus and small target are rejected") {
  CHECK_THROWS_AS(train_vocab({}, 50, 0), EmptyCorpus);
  CHECK_THROWS_AS(train_vocab({"  "}, 50, 0), EmptyCorpus);
  CHECK_THROWS_AS(train_vocab({"abcdef"}, 5, 0), InvalidArgument);
}

TEST_CASE("decode joins continuations and drops specials") {
  Vocab v;
  const TokenId fer = v.add("fer");
  const TokenId rous = v.add("##rous");
  CHECK(decode(v, std::vector<TokenId>{}) == "");
  CHECK(decode(v, std::vector<TokenId>{fer, rous}) == "ferrous");
  CHECK(decode(v, std::vector<TokenId>{fer, rous, kSep, fer}) == "ferrous fer");
  CHECK(decode(v, std::vector<TokenId>{fer, kSep}, true) == "fer [SEP]");
  CHECK_THROWS_AS(decode(v, std::vector<TokenId>{99}), UnknownId);
  CHECK_THROWS_AS(decode(v, std::vector<TokenId>{-1}), UnknownId);
}

TEST_CASE("round trip over corpus text") {
  auto texts = corpus_texts(200);
  Vocab v = train_vocab(texts, 600, 3);
  for (const auto& t : texts) {
    auto ids = encode(v, t);
    CHECK(decode(v, ids) == text::canonicalize(t));
    for (TokenId id : ids) {
      CHECK(id != kPad);
      CHECK(id != kSep);
      CHECK(id != kMask);
      CHECK(id != kUnk);
    }
  }
  for (const auto& t : texts) {
    if (t.rfind("select", 0) == 0) CHECK(decode_query(v, encode(v, t)) == t);
  }
}

TEST_CASE("growing the vocabulary never lengthens a training text") {
  auto texts = corpus_texts(150);
  std::vector<std::size_t> previous(texts.size(), SIZE_MAX);
  for (int size : {120, 200, 300, 450, 700, 1000}) {
    Vocab v = train_vocab(texts, size, 0);
    for (std::size_t i = 0; i < texts.size(); ++i) {
      const std::size_t len = encode(v, texts[i]).size();
      CHECK(len <= previous[i]);
      previous[i] = len;
    }
  }
}
