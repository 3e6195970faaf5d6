#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "seqvec/classify.hpp"
#include "seqvec/knn.hpp"

namespace seqvec {

// Tab-separated reports. Percentages carry two decimals.

/// k, Accuracy(%), Accuracy_std(%)
void write_knn_report(std::ostream& out, const KnnReport& report);

/// One row per family then an "ALL" row averaging the family means:
/// Family, Size, Specificity(%), Specificity_std(%), Sensitivity(%), ...
void write_binary_report(std::ostream& out, const std::vector<std::pair<std::string, MetricsReport>>& rows,
                         const std::vector<std::size_t>& sizes);

/// Classes, Precision(%), Precision_std(%), Sensitivity(%), ..., Accuracy_std(%)
void write_multiclass_report(std::ostream& out, const MulticlassReport& report);

}  // namespace seqvec
