#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqvec/cross_validation.hpp"
#include "seqvec/matrix.hpp"

namespace seqvec {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const noexcept { return tp + tn + fp + fn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o) noexcept {
    tp += o.tp;
    tn += o.tn;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// A metric whose denominator is zero is left empty.
struct Metrics {
  std::optional<double> specificity;
  std::optional<double> sensitivity;
  std::optional<double> accuracy;
  std::optional<double> precision;
};

/// specificity = tn/(tn+fp), sensitivity = tp/(tp+fn),
/// accuracy = (tn+tp)/(tn+tp+fn+fp), precision = tp/(tp+fp).
/// Throws DataError when every count is zero.
Metrics metrics_from_counts(const ConfusionCounts& c);

/// Fold-level mean and sample std of each metric. Folds where a metric is
/// undefined are left out of that metric's summary and reported in warnings.
struct MetricsReport {
  Summary specificity;
  Summary sensitivity;
  Summary accuracy;
  Summary precision;
  std::size_t folds = 0;
  std::vector<std::string> warnings;
};

struct SvmOptions {
  double C = 1.0;
  std::size_t epochs = 20;
  std::uint64_t seed = 1;
};

struct SvmModel {
  std::vector<double> weights;
  double bias = 0.0;
  double C = 1.0;

  double margin(std::span<const double> x) const;
  /// +1 or -1; a margin of exactly zero predicts +1.
  int predict(std::span<const double> x) const { return margin(x) >= 0.0 ? 1 : -1; }
};

/// Primal hinge-loss SVM trained by Pegasos-style stochastic subgradient
/// descent with lambda = 1/(n C) and step 1/(lambda t). The bias is handled
/// as a weight on a constant feature, so it is regularised with w. Returns the
/// mean of the iterates over the second half of the epochs.
SvmModel train_linear_svm(const Matrix<double>& x, std::span<const int> y, const SvmOptions& options = {});

/// (1/2)(|w|^2 + b^2) + C * sum_i max(0, 1 - y_i (w.x_i + b)).
double svm_objective(const SvmModel& model, const Matrix<double>& x, std::span<const int> y);

/// One binary SVM per class (class vs rest); two classes share one model.
struct OneVsRestModel {
  std::vector<std::string> classes;  // sorted
  std::vector<SvmModel> models;

  std::vector<double> margins(std::span<const double> x) const;
  /// Argmax margin; ties go to the smaller class label.
  const std::string& predict(std::span<const double> x) const;
};

OneVsRestModel one_vs_rest(const Matrix<double>& x, std::span<const std::string> y, const SvmOptions& options = {});

/// Feature rows with ids and family labels, aligned by row.
struct LabeledDataset {
  std::vector<std::string> ids;
  Matrix<double> features;
  std::vector<std::string> labels;

  std::size_t size() const noexcept { return ids.size(); }
  /// Keeps rows whose id has a label; throws if nothing is labelled.
  static LabeledDataset from_vectors(std::span<const std::string> ids, const Matrix<double>& features,
                                     const std::map<std::string, std::string>& labels);
  LabeledDataset subset(std::span<const std::size_t> rows) const;
};

struct ProtocolOptions {
  std::size_t folds = 10;
  std::uint64_t seed = 1;
  SvmOptions svm;
};

/// Families below this size cannot be evaluated with the binary protocol.
inline constexpr std::size_t kMinBinaryFamilySize = 10;

/// The family is the positive class; an equal number of sequences drawn
/// uniformly without replacement from all other families is the negative
/// class. Stratified cross-validation of a linear SVM.
MetricsReport binary_family_protocol(const LabeledDataset& data, const std::string& family,
                                     const ProtocolOptions& options = {});

struct MulticlassReport {
  /// Precision, sensitivity and specificity are macro-averaged over classes
  /// within each fold; accuracy is the fraction of test rows classified
  /// correctly.
  MetricsReport metrics;
  std::vector<std::string> classes;
};

/// Restricts to the `top_n` most populous families (ties by label) and
/// cross-validates a one-vs-rest linear SVM.
MulticlassReport multiclass_protocol(const LabeledDataset& data, std::size_t top_n = 25,
                                     const ProtocolOptions& options = {});

/// Families ordered by size (descending), then label.
std::vector<std::pair<std::string, std::size_t>> families_by_size(std::span<const std::string> labels);

}  // namespace seqvec
