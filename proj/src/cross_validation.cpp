#include "seqvec/cross_validation.hpp"

#include <cmath>
#include <map>

#include "seqvec/error.hpp"
#include "seqvec/random.hpp"

namespace seqvec {

std::vector<std::size_t> stratified_folds(std::span<const std::string> labels, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(i);

  Rng rng(seed);
  std::vector<std::size_t> fold(labels.size(), 0);
  std::size_t deal = 0;
  for (auto& [label, members] : groups) {
    rng.shuffle(std::span(members));
    for (std::size_t idx : members) fold[idx] = deal++ % folds;
  }
  return fold;
}

Summary summarize(std::span<const double> values) {
  Summary s;
  s.n = values.size();
  if (s.n == 0) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n < 2) return s;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
  return s;
}

}  // namespace seqvec
