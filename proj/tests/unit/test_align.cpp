#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "../support/oracles.hpp"
#include "seqvec/align.hpp"
#include "seqvec/error.hpp"
#include "seqvec/random.hpp"

using namespace seqvec;

namespace {

std::string random_seq(Rng& rng, std::string_view letters, std::size_t min_len, std::size_t max_len) {
  std::string s;
  const std::size_t len = min_len + rng.below(max_len - min_len + 1);
  for (std::size_t i = 0; i < len; ++i) s.push_back(letters[rng.below(letters.size())]);
  return s;
}

AlignParams uniform_params(int match, int mismatch, int open, int extend) {
  AlignParams p;
  p.substitution = uniform_table(match, mismatch);
  p.gap_open = open;
  p.gap_extend = extend;
  return p;
}

SubstitutionTable blosum50() {
  std::ifstream in(std::filesystem::path(SEQVEC_TEST_DATA) / "blosum50.txt");
  REQUIRE(in.good());
  return load_substitution_matrix(in);
}

constexpr std::string_view kProtein = "ACDEFGHIKLMNPQRSTVWY";

}  // namespace

TEST_CASE("uniform table examples") {
  const auto p = uniform_params(2, -1, -2, -1);
  CHECK(smith_waterman("ACG", "ACG", p) == 6);
  CHECK(smith_waterman("AAAA", "CCCC", p) == 0);
  CHECK_THROWS_AS(smith_waterman("", "ACG", p), DataError);
}

TEST_CASE("classic HEAGAWGHEE / PAWHEAE local alignment") {
  AlignParams p;
  p.substitution = blosum50();
  p.gap_open = -10;
  p.gap_extend = -1;
  const int oracle = testing::reference_local_score("HEAGAWGHEE", "PAWHEAE", p.substitution, -10, -1);
  // AWGHE over AW-HE: 5 + 15 - 10 + 10 + 6.
  CHECK(oracle == 26);
  CHECK(smith_waterman("HEAGAWGHEE", "PAWHEAE", p) == oracle);
}

TEST_CASE("Gotoh agrees with the cubic reference on small DNA pairs") {
  Rng rng(2718);
  const std::vector<AlignParams> params{uniform_params(2, -1, -2, -1), uniform_params(1, -1, -1, -1),
                                        uniform_params(3, -2, -5, -1), uniform_params(2, -3, -4, -2)};
  for (int i = 0; i < 500; ++i) {
    const auto a = random_seq(rng, "ACGT", 1, 12);
    const auto b = random_seq(rng, "ACGT", 1, 12);
    const auto& p = params[i % params.size()];
    CAPTURE(a);
    CAPTURE(b);
    CHECK(smith_waterman(a, b, p) == testing::reference_local_score(a, b, p.substitution, p.gap_open, p.gap_extend));
  }
}

TEST_CASE("Gotoh agrees with the reference on protein pairs under BLOSUM62") {
  Rng rng(31);
  AlignParams p;
  for (int i = 0; i < 100; ++i) {
    const auto a = random_seq(rng, kProtein, 1, 25);
    const auto b = random_seq(rng, kProtein, 1, 25);
    CHECK(smith_waterman(a, b, p) == testing::reference_local_score(a, b, p.substitution, -11, -1));
  }
}

TEST_CASE("symmetry, identity dominance and monotonicity") {
  Rng rng(99);
  AlignParams p;
  for (int i = 0; i < 200; ++i) {
    const auto a = random_seq(rng, kProtein, 1, 60);
    const auto b = random_seq(rng, kProtein, 1, 60);
    const int ab = smith_waterman(a, b, p);
    CHECK(ab == smith_waterman(b, a, p));
    CHECK(smith_waterman(a, a, p) >= ab);
    const auto ext = random_seq(rng, kProtein, 1, 5);
    CHECK(smith_waterman(a + ext, b + ext, p) >= ab);
  }
}

TEST_CASE("BLOSUM62 table") {
  const auto& t = blosum62();
  auto s = [&](char a, char b) { return t[a - 'A'][b - 'A']; };
  CHECK(s('A', 'A') == 4);
  CHECK(s('W', 'W') == 11);
  CHECK(s('C', 'C') == 9);
  CHECK(s('W', 'C') == -2);
  CHECK(s('E', 'Q') == 2);
  CHECK(s('B', 'D') == 4);
  CHECK(s('X', 'X') == -1);
  CHECK(s('J', 'A') == s('X', 'A'));
  for (int i = 0; i < 26; ++i)
    for (int j = 0; j < 26; ++j) CHECK(t[i][j] == t[j][i]);
  // Each standard residue scores highest against itself.
  for (char a : kProtein)
    for (char b : kProtein)
      if (a != b) CHECK(s(a, a) > s(a, b));
}

TEST_CASE("substitution matrix parsing") {
  const auto t = load_substitution_matrix("# toy\n   A  C  *\nA  5 -1 -9\nC -1  7 -9\n* -9 -9  1\n");
  CHECK(t['A' - 'A']['A' - 'A'] == 5);
  CHECK(t['C' - 'A']['A' - 'A'] == -1);
  CHECK(t['G' - 'A']['A' - 'A'] == -1);  // missing letters take the minimum
  CHECK_THROWS_AS(load_substitution_matrix("A C\nA 1\n"), ParseError);
  CHECK_THROWS_AS(load_substitution_matrix(""), ParseError);
  AlignParams asym;
  asym.substitution = load_substitution_matrix("   A  C\nA  1  2\nC  3  1\n");
  CHECK_THROWS_AS(asym.validate(), ConfigError);
}

TEST_CASE("AlignParams validation") {
  AlignParams p;
  CHECK_NOTHROW(p.validate());
  p.gap_open = -1;
  p.gap_extend = -2;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.gap_open = 0;
  p.gap_extend = 1;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("align_topk and align_classify") {
  const std::vector<SequenceRecord> db{{"copy", "", "MKVLAAGIW", "F1"},
                                       {"q", "", "MKVLAAGIW", "F1"},
                                       {"b2", "", "PPPPPPPP", "F2"},
                                       {"b1", "", "PPPPPPPP", "F2"},
                                       {"c", "", "MKVLA", "F1"}};
  const SequenceRecord query{"q", "", "MKVLAAGIW", std::nullopt};
  const AlignParams p;
  auto hits = align_topk(db, query, 10, p, 2);
  REQUIRE(hits.size() == 4);
  CHECK(hits[0].id == "copy");
  CHECK(hits[0].rank == 1);
  for (std::size_t i = 1; i < hits.size(); ++i) CHECK(hits[i - 1].score >= hits[i].score);
  CHECK(hits[2].id == "b1");
  CHECK(hits[3].id == "b2");
  CHECK(align_topk(db, query, 10, p, 1) == hits);

  std::map<std::string, std::string> labels;
  for (const auto& r : db) labels[r.id] = *r.family;
  CHECK(align_classify(db, labels, query, 3, p) == "F1");
  CHECK_THROWS_AS(align_classify(std::vector<SequenceRecord>{}, labels, query, 3, p), DataError);
}
