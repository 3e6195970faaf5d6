#include "seqvec/knn.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "seqvec/error.hpp"

namespace seqvec {

namespace {

struct Candidate {
  std::size_t index;
  double score;
};

// Top-k rows of `index` among those accepted by `allowed`, best first.
template <class Allowed>
std::vector<Candidate> top_candidates(const VectorIndex& index, std::span<const double> query, std::size_t k,
                                      Allowed&& allowed) {
  std::vector<Candidate> all;
  all.reserve(index.size());
  for (std::size_t i = 0; i < index.size(); ++i)
    if (allowed(i)) all.push_back({i, index.score(query, i)});
  const bool ascending = score_order(index.metric()) == ScoreOrder::Ascending;
  const auto& ids = index.ids();
  auto better = [&](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return ascending ? a.score < b.score : a.score > b.score;
    return ids[a.index] < ids[b.index];
  };
  const std::size_t take = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end(), better);
  all.resize(take);
  return all;
}

}  // namespace

std::string_view to_string(Metric metric) { return metric == Metric::Euclidean ? "euclidean" : "cosine"; }

Metric parse_metric(std::string_view text) {
  if (text == "euclidean") return Metric::Euclidean;
  if (text == "cosine") return Metric::Cosine;
  throw ConfigError("unknown metric '" + std::string(text) + "' (expected euclidean or cosine)");
}

VectorIndex::VectorIndex(std::vector<std::string> ids, Matrix<double> vectors, Metric metric,
                         std::optional<std::vector<std::string>> labels)
    : ids_(std::move(ids)), vectors_(std::move(vectors)), metric_(metric), labels_(std::move(labels)) {
  if (ids_.size() != vectors_.rows()) throw DataError("vector index: id count does not match row count");
  if (!ids_.empty() && vectors_.cols() == 0) throw DataError("vector index: dimension must be at least 1");
  if (labels_ && labels_->size() != ids_.size()) throw DataError("vector index: label count does not match row count");
  by_id_.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i)
    if (!by_id_.emplace(ids_[i], i).second) throw DataError("vector index: duplicate id '" + ids_[i] + "'");
}

std::optional<std::size_t> VectorIndex::find(std::string_view id) const {
  if (auto it = by_id_.find(std::string(id)); it != by_id_.end()) return it->second;
  return std::nullopt;
}

double VectorIndex::score(std::span<const double> query, std::size_t i) const {
  const auto r = row(i);
  if (metric_ == Metric::Cosine) return cosine(query, r);
  double ss = 0.0;
  for (std::size_t j = 0; j < r.size(); ++j) {
    const double diff = query[j] - r[j];
    ss += diff * diff;
  }
  return std::sqrt(ss);
}

std::vector<NeighborResult> neighbors(const VectorIndex& index, std::span<const double> query, std::size_t k,
                                      std::optional<std::string_view> exclude_id) {
  if (k == 0) throw ConfigError("k must be at least 1");
  if (index.size() == 0) throw DataError("cannot query an empty index");
  if (query.size() != index.dim())
    throw DataError("query dimension " + std::to_string(query.size()) + " does not match index dimension " +
                    std::to_string(index.dim()));
  const auto excluded = exclude_id ? index.find(*exclude_id) : std::nullopt;
  const auto top = top_candidates(index, query, k, [&](std::size_t i) { return !excluded || i != *excluded; });
  std::vector<NeighborResult> out;
  out.reserve(top.size());
  for (std::size_t r = 0; r < top.size(); ++r) out.push_back({index.ids()[top[r].index], top[r].score, r + 1});
  return out;
}

std::string majority_vote(std::span<const LabeledScore> hits, ScoreOrder order) {
  if (hits.empty()) throw DataError("majority vote over an empty neighbour list");
  struct Tally {
    std::size_t votes = 0;
    double score_sum = 0.0;
  };
  std::map<std::string, Tally> tally;
  for (const auto& hit : hits) {
    auto& t = tally[hit.label];
    ++t.votes;
    t.score_sum += hit.score;
  }
  // std::map iterates labels in ascending order, so a strict comparison keeps
  // the smaller label on a full tie.
  auto best = tally.begin();
  for (auto it = std::next(tally.begin()); it != tally.end(); ++it) {
    const auto& a = it->second;
    const auto& b = best->second;
    if (a.votes != b.votes) {
      if (a.votes > b.votes) best = it;
      continue;
    }
    const bool better_score = order == ScoreOrder::Ascending ? a.score_sum < b.score_sum : a.score_sum > b.score_sum;
    if (better_score) best = it;
  }
  return best->first;
}

std::string majority_vote(std::span<const NeighborResult> hits, const std::map<std::string, std::string>& labels,
                          ScoreOrder order) {
  std::vector<LabeledScore> labeled;
  labeled.reserve(hits.size());
  for (const auto& hit : hits) {
    auto it = labels.find(hit.id);
    if (it == labels.end()) throw DataError("neighbour '" + hit.id + "' has no family label");
    labeled.push_back({it->second, hit.score});
  }
  return majority_vote(labeled, order);
}

KnnReport knn_cross_validate(const VectorIndex& index, std::size_t folds, std::span<const std::size_t> k_values,
                             std::uint64_t seed) {
  if (folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
  if (k_values.empty()) throw ConfigError("no k values given");
  for (auto k : k_values)
    if (k == 0) throw ConfigError("k must be at least 1");
  if (!index.labels()) throw DataError("kNN cross-validation needs labelled vectors");
  const auto& labels = *index.labels();

  KnnReport report;
  std::map<std::string, std::size_t> family_size;
  for (const auto& l : labels) ++family_size[l];
  std::set<std::string> usable;
  for (const auto& [family, n] : family_size) {
    if (n >= folds) {
      usable.insert(family);
    } else {
      report.dropped_families.push_back(family);
      report.warnings.push_back("family '" + family + "' has " + std::to_string(n) + " member(s), fewer than " +
                                std::to_string(folds) + " folds; dropped");
    }
  }
  if (usable.size() < 2) throw DataError("kNN cross-validation needs at least 2 families with enough members");

  std::vector<std::size_t> members;
  std::vector<std::string> member_labels;
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (!usable.contains(labels[i])) continue;
    members.push_back(i);
    member_labels.push_back(labels[i]);
  }
  report.evaluated = members.size();

  const auto fold_of_member = stratified_folds(member_labels, folds, seed);
  std::vector<std::size_t> fold(index.size(), folds);  // `folds` marks rows outside the evaluation
  for (std::size_t m = 0; m < members.size(); ++m) fold[members[m]] = fold_of_member[m];

  const std::size_t max_k = *std::max_element(k_values.begin(), k_values.end());
  const ScoreOrder order = score_order(index.metric());
  std::vector<std::vector<std::size_t>> correct(k_values.size(), std::vector<std::size_t>(folds, 0));
  std::vector<std::size_t> tested(folds, 0);

  for (std::size_t m = 0; m < members.size(); ++m) {
    const std::size_t q = members[m];
    const std::size_t f = fold[q];
    const auto top = top_candidates(index, index.row(q), max_k, [&](std::size_t i) { return fold[i] < folds && fold[i] != f; });
    ++tested[f];
    std::vector<LabeledScore> hits;
    for (std::size_t ki = 0; ki < k_values.size(); ++ki) {
      hits.clear();
      for (std::size_t r = 0; r < std::min(k_values[ki], top.size()); ++r)
        hits.push_back({labels[top[r].index], top[r].score});
      if (majority_vote(hits, order) == labels[q]) ++correct[ki][f];
    }
  }

  for (std::size_t ki = 0; ki < k_values.size(); ++ki) {
    KnnAccuracy acc;
    acc.k = k_values[ki];
    for (std::size_t f = 0; f < folds; ++f)
      if (tested[f] > 0) acc.per_fold.push_back(static_cast<double>(correct[ki][f]) / static_cast<double>(tested[f]));
    acc.accuracy = summarize(acc.per_fold);
    report.results.push_back(std::move(acc));
  }
  return report;
}

}  // namespace seqvec
