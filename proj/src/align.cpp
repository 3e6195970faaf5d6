#include "seqvec/align.hpp"

#include <algorithm>
#include <cctype>
#include <climits>
#include <istream>
#include <optional>
#include <sstream>
#include <thread>

#include "seqvec/error.hpp"

namespace seqvec {

namespace {

constexpr std::string_view kBlosum62 = R"(#  BLOSUM62
   A  R  N  D  C  Q  E  G  H  I  L  K  M  F  P  S  T  W  Y  V  B  Z  X  *
A  4 -1 -2 -2  0 -1 -1  0 -2 -1 -1 -1 -1 -2 -1  1  0 -3 -2  0 -2 -1  0 -4
R -1  5  0 -2 -3  1  0 -2  0 -3 -2  2 -1 -3 -2 -1 -1 -3 -2 -3 -1  0 -1 -4
N -2  0  6  1 -3  0  0  0  1 -3 -3  0 -2 -3 -2  1  0 -4 -2 -3  3  0 -1 -4
D -2 -2  1  6 -3  0  2 -1 -1 -3 -4 -1 -3 -3 -1  0 -1 -4 -3 -3  4  1 -1 -4
C  0 -3 -3 -3  9 -3 -4 -3 -3 -1 -1 -3 -1 -2 -3 -1 -1 -2 -2 -1 -3 -3 -2 -4
Q -1  1  0  0 -3  5  2 -2  0 -3 -2  1  0 -3 -1  0 -1 -2 -1 -2  0  3 -1 -4
E -1  0  0  2 -4  2  5 -2  0 -3 -3  1 -2 -3 -1  0 -1 -3 -2 -2  1  4 -1 -4
G  0 -2  0 -1 -3 -2 -2  6 -2 -4 -4 -2 -3 -3 -2  0 -2 -2 -3 -3 -1 -2 -1 -4
H -2  0  1 -1 -3  0  0 -2  8 -3 -3 -1 -2 -1 -2 -1 -2 -2  2 -3  0  0 -1 -4
I -1 -3 -3 -3 -1 -3 -3 -4 -3  4  2 -3  1  0 -3 -2 -1 -3 -1  3 -3 -3 -1 -4
L -1 -2 -3 -4 -1 -2 -3 -4 -3  2  4 -2  2  0 -3 -2 -1 -2 -1  1 -4 -3 -1 -4
K -1  2  0 -1 -3  1  1 -2 -1 -3 -2  5 -1 -3 -1  0 -1 -3 -2 -2  0  1 -1 -4
M -1 -1 -2 -3 -1  0 -2 -3 -2  1  2 -1  5  0 -2 -1 -1 -1 -1  1 -3 -1 -1 -4
F -2 -3 -3 -3 -2 -3 -3 -3 -1  0  0 -3  0  6 -4 -2 -2  1  3 -1 -3 -3 -1 -4
P -1 -2 -2 -1 -3 -1 -1 -2 -2 -3 -3 -1 -2 -4  7 -1 -1 -4 -3 -2 -2 -1 -2 -4
S  1 -1  1  0 -1  0  0  0 -1 -2 -2  0 -1 -2 -1  4  1 -3 -2 -2  0  0  0 -4
T  0 -1  0 -1 -1 -1 -1 -2 -2 -1 -1 -1 -1 -2 -1  1  5 -2 -2  0 -1 -1  0 -4
W -3 -3 -4 -4 -2 -2 -3 -2 -2 -3 -2 -3 -1  1 -4 -3 -2 11  2 -3 -4 -3 -2 -4
Y -2 -2 -2 -3 -2 -1 -2 -3  2 -1 -1 -2 -1  3 -3 -2 -2  2  7 -1 -3 -2 -1 -4
V  0 -3 -3 -3 -1 -2 -2 -3 -3  3  1 -2  1 -1 -2 -2  0 -3 -1  4 -3 -2 -1 -4
B -2 -1  3  4 -3  0  1 -1  0 -3 -4  0 -3 -3 -2  0 -1 -4 -3 -3  4  1 -1 -4
Z -1  0  0  1 -3  3  4 -2  0 -3 -3  1 -1 -3 -1  0 -1 -3 -2 -2  1  4 -1 -4
X  0 -1 -1 -1 -2 -1 -1 -1 -1 -1 -1 -1 -1 -1 -2  0  0 -2 -1 -1 -1 -1 -1 -4
* -4 -4 -4 -4 -4 -4 -4 -4 -4 -4 -4 -4 -4 -4 -4 -4 -4 -4 -4 -4 -4 -4 -4  1
)";

std::vector<std::uint8_t> to_indices(std::string_view s) {
  std::vector<std::uint8_t> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(s[i])));
    if (c < 'A' || c > 'Z') throw DataError(std::string("cannot align residue '") + s[i] + "'");
    out[i] = static_cast<std::uint8_t>(c - 'A');
  }
  return out;
}

std::size_t resolve_workers(std::size_t workers, std::size_t jobs) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  return std::max<std::size_t>(1, std::min(workers, jobs));
}

}  // namespace

SubstitutionTable load_substitution_matrix(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<char> columns;
  std::array<std::array<std::optional<int>, 26>, 26> seen{};
  bool have_header = false;
  std::size_t rows = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream fields(line);
    std::string first;
    if (!(fields >> first) || first.front() == '#') continue;

    if (!have_header) {
      columns.push_back(first.front());
      for (std::string tok; fields >> tok;) {
        if (tok.size() != 1) throw ParseError("matrix header entries must be single letters", line_no);
        columns.push_back(tok.front());
      }
      have_header = true;
      continue;
    }

    if (first.size() != 1) throw ParseError("matrix row must start with a single letter", line_no);
    const char row = static_cast<char>(std::toupper(static_cast<unsigned char>(first.front())));
    std::size_t col = 0;
    for (int score; fields >> score; ++col) {
      if (col >= columns.size()) throw ParseError("matrix row has more scores than header columns", line_no);
      const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(columns[col])));
      if (row >= 'A' && row <= 'Z' && c >= 'A' && c <= 'Z') seen[row - 'A'][c - 'A'] = score;
    }
    if (!fields.eof()) throw ParseError("non-numeric matrix score", line_no);
    if (col != columns.size()) throw ParseError("matrix row has fewer scores than header columns", line_no);
    ++rows;
  }
  if (!have_header || rows == 0) throw ParseError("substitution matrix has no rows", line_no);

  int min_score = INT_MAX;
  for (const auto& r : seen)
    for (const auto& v : r)
      if (v) min_score = std::min(min_score, *v);
  const int x = 'X' - 'A';
  const bool have_x = seen[x][x].has_value();

  SubstitutionTable table{};
  for (int i = 0; i < 26; ++i) {
    for (int j = 0; j < 26; ++j) {
      if (seen[i][j]) {
        table[i][j] = *seen[i][j];
        continue;
      }
      // Letters missing from the file stand in as X.
      const int ii = seen[i][i] ? i : x;
      const int jj = seen[j][j] ? j : x;
      if (have_x && seen[ii][jj])
        table[i][j] = *seen[ii][jj];
      else
        table[i][j] = min_score;
    }
  }
  return table;
}

SubstitutionTable load_substitution_matrix(std::string_view text) {
  std::istringstream in{std::string(text)};
  return load_substitution_matrix(in);
}

const SubstitutionTable& blosum62() {
  static const SubstitutionTable table = load_substitution_matrix(kBlosum62);
  return table;
}

SubstitutionTable uniform_table(int match, int mismatch) {
  SubstitutionTable t{};
  for (int i = 0; i < 26; ++i)
    for (int j = 0; j < 26; ++j) t[i][j] = i == j ? match : mismatch;
  return t;
}

void AlignParams::validate() const {
  if (!(gap_open <= gap_extend && gap_extend <= 0))
    throw ConfigError("gap penalties must satisfy gap_open <= gap_extend <= 0");
  for (int i = 0; i < 26; ++i)
    for (int j = i + 1; j < 26; ++j)
      if (substitution[i][j] != substitution[j][i]) throw ConfigError("substitution matrix must be symmetric");
}

int smith_waterman(std::string_view a, std::string_view b, const AlignParams& params) {
  if (a.empty() || b.empty()) throw DataError("cannot align an empty sequence");
  if (params.gap_open > params.gap_extend || params.gap_extend > 0)
    throw ConfigError("gap penalties must satisfy gap_open <= gap_extend <= 0");
  // Columns run over the shorter sequence; symmetric tables make this safe.
  const auto rows = to_indices(a.size() >= b.size() ? a : b);
  const auto cols = to_indices(a.size() >= b.size() ? b : a);
  const auto& sub = params.substitution;
  const int open = params.gap_open;
  const int extend = params.gap_extend;
  constexpr int kNegInf = INT_MIN / 4;

  const std::size_t n = cols.size();
  std::vector<int> h_prev(n + 1, 0);
  std::vector<int> h_cur(n + 1, 0);
  std::vector<int> f(n + 1, kNegInf);  // gap opened along the rows
  int best = 0;
  for (std::uint8_t r : rows) {
    int e = kNegInf;  // gap opened along the columns
    h_cur[0] = 0;
    const auto& score_row = sub[r];
    for (std::size_t j = 1; j <= n; ++j) {
      e = std::max(e + extend, h_cur[j - 1] + open);
      f[j] = std::max(f[j] + extend, h_prev[j] + open);
      const int h = std::max({0, h_prev[j - 1] + score_row[cols[j - 1]], e, f[j]});
      h_cur[j] = h;
      best = std::max(best, h);
    }
    std::swap(h_prev, h_cur);
  }
  return best;
}

std::vector<NeighborResult> align_topk(std::span<const SequenceRecord> db, const SequenceRecord& query, std::size_t k,
                                       const AlignParams& params, std::size_t workers) {
  if (db.empty()) throw DataError("alignment database is empty");
  if (k == 0) throw ConfigError("k must be at least 1");
  params.validate();

  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < db.size(); ++i)
    if (db[i].id != query.id) candidates.push_back(i);
  std::vector<int> scores(candidates.size(), 0);

  const std::size_t threads = resolve_workers(workers, candidates.size());
  auto run = [&](std::size_t w) {
    const std::size_t begin = candidates.size() * w / threads;
    const std::size_t end = candidates.size() * (w + 1) / threads;
    for (std::size_t c = begin; c < end; ++c)
      scores[c] = smith_waterman(query.residues, db[candidates[c]].residues, params);
  };
  if (threads == 1) {
    run(0);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(run, w);
  }

  std::vector<std::size_t> order(candidates.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto better = [&](std::size_t x, std::size_t y) {
    if (scores[x] != scores[y]) return scores[x] > scores[y];
    return db[candidates[x]].id < db[candidates[y]].id;
  };
  const std::size_t take = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(), better);

  std::vector<NeighborResult> hits;
  hits.reserve(take);
  for (std::size_t r = 0; r < take; ++r)
    hits.push_back({db[candidates[order[r]]].id, static_cast<double>(scores[order[r]]), r + 1});
  return hits;
}

std::string align_classify(std::span<const SequenceRecord> db, const std::map<std::string, std::string>& labels,
                           const SequenceRecord& query, std::size_t k, const AlignParams& params, std::size_t workers) {
  const auto hits = align_topk(db, query, k, params, workers);
  if (hits.empty()) throw DataError("no alignment hits for '" + query.id + "'");
  return majority_vote(hits, labels, ScoreOrder::Descending);
}

}  // namespace seqvec
