#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "seqvec/cross_validation.hpp"
#include "seqvec/matrix.hpp"

namespace seqvec {

enum class Metric { Euclidean, Cosine };

std::string_view to_string(Metric metric);
Metric parse_metric(std::string_view text);

/// Whether a smaller or a larger score means a closer hit.
enum class ScoreOrder { Ascending, Descending };

constexpr ScoreOrder score_order(Metric metric) noexcept {
  return metric == Metric::Euclidean ? ScoreOrder::Ascending : ScoreOrder::Descending;
}

struct NeighborResult {
  std::string id;
  /// Distance (Euclidean), similarity (cosine) or alignment score.
  double score = 0.0;
  /// 1-based.
  std::size_t rank = 0;

  friend bool operator==(const NeighborResult&, const NeighborResult&) = default;
};

/// Immutable brute-force index over row vectors.
class VectorIndex {
 public:
  VectorIndex(std::vector<std::string> ids, Matrix<double> vectors, Metric metric = Metric::Euclidean,
              std::optional<std::vector<std::string>> labels = std::nullopt);

  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t dim() const noexcept { return vectors_.cols(); }
  Metric metric() const noexcept { return metric_; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const std::optional<std::vector<std::string>>& labels() const noexcept { return labels_; }
  std::span<const double> row(std::size_t i) const { return vectors_.row(i); }
  const Matrix<double>& vectors() const noexcept { return vectors_; }
  std::optional<std::size_t> find(std::string_view id) const;

  /// Distance or similarity between a query and row i, per the metric.
  double score(std::span<const double> query, std::size_t i) const;

 private:
  std::vector<std::string> ids_;
  Matrix<double> vectors_;
  Metric metric_;
  std::optional<std::vector<std::string>> labels_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

/// Exact top-k by the index metric; ties go to the lexicographically smaller
/// id. `exclude_id` is never returned. Returns everything if k exceeds the
/// number of candidates.
std::vector<NeighborResult> neighbors(const VectorIndex& index, std::span<const double> query, std::size_t k,
                                      std::optional<std::string_view> exclude_id = std::nullopt);

/// A retrieved hit reduced to what the vote needs.
struct LabeledScore {
  std::string label;
  double score = 0.0;
};

/// Most frequent label; ties go to the better summed score (smaller for
/// Ascending, larger for Descending), then to the smaller label.
std::string majority_vote(std::span<const LabeledScore> hits, ScoreOrder order);
std::string majority_vote(std::span<const NeighborResult> hits, const std::map<std::string, std::string>& labels,
                          ScoreOrder order);

struct KnnAccuracy {
  std::size_t k = 0;
  Summary accuracy;
  std::vector<double> per_fold;
};

struct KnnReport {
  std::vector<KnnAccuracy> results;
  std::vector<std::string> warnings;
  std::vector<std::string> dropped_families;
  std::size_t evaluated = 0;
};

/// Stratified `folds`-fold cross-validation of majority-vote kNN. Each test
/// vector is classified from neighbours in the other folds only. Families
/// with fewer than `folds` members are dropped with a warning.
KnnReport knn_cross_validate(const VectorIndex& index, std::size_t folds, std::span<const std::size_t> k_values,
                             std::uint64_t seed);

}  // namespace seqvec
