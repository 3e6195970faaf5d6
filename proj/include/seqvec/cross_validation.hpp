#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace seqvec {

/// Assigns each item a fold in [0, folds). Items are grouped by label (in
/// label order), shuffled within the group, and dealt round-robin with the
/// deal position carried across groups, so every label is spread over the
/// folds within one member and fold sizes differ by at most one.
std::vector<std::size_t> stratified_folds(std::span<const std::string> labels, std::size_t folds, std::uint64_t seed);

/// Mean and sample standard deviation (n - 1 denominator; 0 for n < 2).
struct Summary {
  double mean = 0.0;
  double std = 0.0;
  std::size_t n = 0;
};

Summary summarize(std::span<const double> values);

}  // namespace seqvec
