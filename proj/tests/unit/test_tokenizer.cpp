#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>

#include "seqvec/error.hpp"
#include "seqvec/tokenizer.hpp"

using namespace seqvec;
using Strings = std::vector<std::string>;

TEST_CASE("kmers_overlapping") {
  CHECK(kmers_overlapping("ACGTTA", 3) == Strings{"ACG", "CGT", "GTT", "TTA"});
  CHECK(kmers_overlapping("QWERTYQWERTY", 3) ==
        Strings{"QWE", "WER", "ERT", "RTY", "TYQ", "YQW", "QWE", "WER", "ERT", "RTY"});
  CHECK_THROWS_AS(kmers_overlapping("AC", 3), DataError);
}

TEST_CASE("kmers_nonoverlapping") {
  const auto p = kmers_nonoverlapping("QWERTYQWERTY", 3);
  REQUIRE(p.size() == 3);
  CHECK(p[0] == Strings{"QWE", "RTY", "QWE", "RTY"});
  CHECK(p[1] == Strings{"WER", "TYQ", "WER"});
  CHECK(p[2] == Strings{"ERT", "YQW", "ERT"});
  CHECK(kmers_nonoverlapping("AAAA", 2) == std::vector<Strings>{{"AA", "AA"}, {"AA"}});
  CHECK_THROWS_AS(kmers_nonoverlapping("AAA", 3), DataError);
  CHECK_THROWS_AS(kmers_nonoverlapping("AAA", 0), ConfigError);
}

TEST_CASE("tokenizer length properties") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 1 + rng.below(5);
    const std::size_t len = 2 * k - 1 + rng.below(30);
    std::string s;
    for (std::size_t i = 0; i < len; ++i) s.push_back("ACGT"[rng.below(4)]);

    const auto ov = kmers_overlapping(s, k);
    REQUIRE(ov.size() == len - k + 1);
    std::string prefix;
    for (const auto& km : ov) prefix.push_back(km[0]);
    CHECK(prefix == s.substr(0, len - k + 1));

    const auto nov = kmers_nonoverlapping(s, k);
    std::size_t total = 0, expected = 0;
    std::vector<bool> covered(len, false);
    for (std::size_t p = 0; p < k; ++p) {
      CHECK(nov[p].size() == (len - p) / k);
      CHECK_FALSE(nov[p].empty());
      expected += (len - p) / k;
      total += nov[p].size();
      for (std::size_t j = 0; j < nov[p].size(); ++j) {
        CHECK(nov[p][j] == s.substr(p + j * k, k));
        for (std::size_t c = 0; c < k; ++c) covered[p + j * k + c] = true;
      }
    }
    CHECK(total == expected);
    CHECK(std::all_of(covered.begin(), covered.end(), [](bool b) { return b; }));
  }
}

TEST_CASE("parse_token_mode") {
  CHECK(parse_token_mode("overlap") == TokenMode::Overlapping);
  CHECK(parse_token_mode("nonoverlapping") == TokenMode::NonOverlapping);
  CHECK_THROWS_AS(parse_token_mode("stride2"), ConfigError);
}

static std::map<std::string, std::uint64_t> counts_of(const Vocabulary& v) {
  std::map<std::string, std::uint64_t> out;
  for (TokenId i = 0; i < v.size(); ++i) out[v.token(i)] = v.count(i);
  return out;
}

static Strings decode(const Vocabulary& v, const std::vector<TokenId>& ids) {
  Strings out;
  for (auto id : ids) out.push_back(v.token(id));
  return out;
}

TEST_CASE("build_corpus on the phase example") {
  const std::vector<SequenceRecord> recs{{"q", "", "QWERTYQWERTY", std::nullopt}};
  const Corpus c = build_corpus(recs, {3, TokenMode::NonOverlapping}, 1);
  REQUIRE(c.docs.size() == 3);
  for (const auto& d : c.docs) CHECK(d.doc_tag == 0);
  CHECK(c.vocab.size() == 6);
  const std::map<std::string, std::uint64_t> expected{{"QWE", 2}, {"RTY", 2}, {"WER", 2},
                                                      {"TYQ", 1}, {"ERT", 2}, {"YQW", 1}};
  CHECK(counts_of(c.vocab) == expected);
  CHECK(c.vocab.total() == 10);

  const Corpus c2 = build_corpus(recs, {3, TokenMode::NonOverlapping}, 2);
  CHECK(c2.vocab.size() == 4);
  CHECK_FALSE(c2.vocab.find("TYQ"));
  CHECK_FALSE(c2.vocab.find("YQW"));
  REQUIRE(c2.docs.size() == 3);
  CHECK(decode(c2.vocab, c2.docs[0].tokens) == Strings{"QWE", "RTY", "QWE", "RTY"});
  CHECK(decode(c2.vocab, c2.docs[1].tokens) == Strings{"WER", "WER"});
  CHECK(decode(c2.vocab, c2.docs[2].tokens) == Strings{"ERT", "ERT"});

  CHECK_THROWS_AS(build_corpus(std::vector<SequenceRecord>{}, {3, TokenMode::NonOverlapping}, 1), DataError);
}

TEST_CASE("build_corpus skips short sequences and keeps tags dense") {
  const std::vector<SequenceRecord> recs{{"a", "", "ACGTAC", std::nullopt},
                                         {"short", "", "AC", std::nullopt},
                                         {"b", "", "GGGTTT", std::nullopt}};
  const Corpus c = build_corpus(recs, {3, TokenMode::Overlapping}, 1);
  CHECK(c.skipped == Strings{"short"});
  CHECK(c.sequence_ids == Strings{"a", "b"});
  REQUIRE(c.docs.size() == 2);
  CHECK(c.docs[0].doc_tag == 0);
  CHECK(c.docs[1].doc_tag == 1);
  for (const auto& d : c.docs)
    for (auto t : d.tokens) CHECK(t < c.vocab.size());
}

TEST_CASE("vocabulary sampling table") {
  const Vocabulary v({"a", "b", "c"}, {16, 1, 81});
  const auto t = v.sampling_table();
  REQUIRE(t.size() == 3);
  const double z = 8.0 + 1.0 + 27.0;
  CHECK(t[0] == doctest::Approx(8.0 / z).epsilon(1e-12));
  CHECK(t[1] == doctest::Approx(9.0 / z).epsilon(1e-12));
  CHECK(std::abs(t[2] - 1.0) < 1e-9);
  CHECK(std::is_sorted(t.begin(), t.end()));
  CHECK_THROWS_AS(Vocabulary({"a"}, {1}, 2), DataError);
  CHECK_THROWS_AS(Vocabulary({"a", "a"}, {1, 1}), DataError);

  Rng rng(1);
  std::array<int, 3> hits{};
  for (int i = 0; i < 36000; ++i) ++hits[v.sample(rng)];
  CHECK(hits[0] == doctest::Approx(8000).epsilon(0.05));
  CHECK(hits[2] == doctest::Approx(27000).epsilon(0.05));
}

TEST_CASE("subsample_filter") {
  const Vocabulary v({"a", "b"}, {3, 1});
  const std::vector<TokenId> toks{0, 1, 0, 0, 1};
  Rng rng(1);
  CHECK(subsample_filter(toks, v, 1.0, rng) == toks);
  CHECK(subsample_filter(std::vector<TokenId>{}, v, 1e-4, rng).empty());
  CHECK_THROWS_AS(subsample_filter(toks, v, 0.0, rng), ConfigError);

  const Vocabulary single({"z"}, {100000});
  const std::vector<TokenId> many(100000, 0);
  Rng r2(11);
  const auto kept = subsample_filter(many, single, 1e-4, r2);
  const double rate = static_cast<double>(kept.size()) / 1e5;
  CHECK(std::abs(rate - 0.0101) < 0.002);

  Rng a(9), b(9);
  CHECK(subsample_filter(many, single, 1e-3, a) == subsample_filter(many, single, 1e-3, b));
}

static bool prefix_free(const std::vector<HuffmanCode>& codes) {
  for (std::size_t i = 0; i < codes.size(); ++i)
    for (std::size_t j = 0; j < codes.size(); ++j) {
      if (i == j) continue;
      const auto& a = codes[i].bits;
      const auto& b = codes[j].bits;
      if (a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin())) return false;
    }
  return true;
}

TEST_CASE("build_huffman") {
  const std::vector<std::uint64_t> two{1, 1};
  auto c = build_huffman(two);
  CHECK(c[0].bits.size() == 1);
  CHECK(c[1].bits.size() == 1);
  CHECK(c[0].bits[0] != c[1].bits[0]);

  const std::vector<std::uint64_t> three{4, 1, 1};
  c = build_huffman(three);
  CHECK(c[0].bits.size() == 1);
  CHECK(c[1].bits.size() == 2);
  CHECK(c[2].bits.size() == 2);

  CHECK_THROWS_AS(build_huffman(std::vector<std::uint64_t>{1}), DataError);
  CHECK(build_huffman(three) == build_huffman(three));
}

TEST_CASE("huffman structure on random counts") {
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t v = 2 + rng.below(40);
    std::vector<std::uint64_t> counts(v);
    for (auto& x : counts) x = 1 + rng.below(20);
    const auto codes = build_huffman(counts);
    std::set<std::uint32_t> inner;
    double kraft = 0.0;
    std::uint64_t cost = 0;
    for (std::size_t i = 0; i < v; ++i) {
      REQUIRE(codes[i].bits.size() == codes[i].path.size());
      CHECK(codes[i].path.front() == v - 2);  // root
      for (auto n : codes[i].path) {
        CHECK(n < v - 1);
        inner.insert(n);
      }
      kraft += std::ldexp(1.0, -static_cast<int>(codes[i].bits.size()));
      cost += counts[i] * codes[i].bits.size();
    }
    CHECK(inner.size() == v - 1);
    CHECK(kraft == doctest::Approx(1.0));
    CHECK(prefix_free(codes));

    // Optimal cost equals the sum of merged weights of a plain Huffman run.
    std::multiset<std::uint64_t> heap(counts.begin(), counts.end());
    std::uint64_t optimal = 0;
    while (heap.size() > 1) {
      const auto a = *heap.begin();
      heap.erase(heap.begin());
      const auto b = *heap.begin();
      heap.erase(heap.begin());
      optimal += a + b;
      heap.insert(a + b);
    }
    CHECK(cost == optimal);
  }
}
