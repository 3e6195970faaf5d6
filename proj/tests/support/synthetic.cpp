#include "synthetic.hpp"

#include <cmath>
#include <string_view>

#include "seqvec/random.hpp"

namespace seqvec::testing {

std::vector<SequenceRecord> markov_families(const MarkovFamilySpec& spec) {
  const std::string_view residues(kStandardResidues);
  const std::size_t a = residues.size();
  Rng rng(spec.seed);
  std::vector<SequenceRecord> out;
  for (std::size_t f = 0; f < spec.families; ++f) {
    // Flat Dirichlet rows as normalised exponentials, stored cumulatively.
    std::vector<std::vector<double>> cdf(a, std::vector<double>(a));
    for (auto& row : cdf) {
      double total = 0.0;
      for (auto& v : row) {
        v = -std::log(1.0 - rng.uniform());
        total += v;
      }
      double acc = 0.0;
      for (auto& v : row) {
        acc += v / total;
        v = acc;
      }
      row.back() = 1.0;
    }
    for (std::size_t s = 0; s < spec.per_family; ++s) {
      std::string seq;
      seq.reserve(spec.length);
      std::size_t state = rng.below(a);
      seq.push_back(residues[state]);
      while (seq.size() < spec.length) {
        const double u = rng.uniform();
        std::size_t next = 0;
        while (next + 1 < a && cdf[state][next] <= u) ++next;
        state = next;
        seq.push_back(residues[state]);
      }
      const std::string family = "F" + std::to_string(f);
      out.push_back({family + "_" + std::to_string(s), "", std::move(seq), family});
    }
  }
  return out;
}

constexpr double kPi = 3.14159265358979323846;

Clusters separated_clusters(std::size_t classes, std::size_t per_class, std::size_t dim, double radius,
                            double spacing, std::uint64_t seed) {
  Rng rng(seed);
  Clusters c;
  for (std::size_t k = 0; k < classes; ++k) {
    for (std::size_t i = 0; i < per_class; ++i) {
      std::vector<double> p(dim, 0.0);
      p[k % dim] = spacing * static_cast<double>(1 + k / dim);
      // Uniform in the ball: Gaussian direction, radius scaled by u^(1/dim).
      std::vector<double> off(dim);
      double n2 = 0.0;
      while (n2 == 0.0) {
        for (auto& v : off) {
          v = std::sqrt(-2.0 * std::log(1.0 - rng.uniform())) * std::cos(2.0 * kPi * rng.uniform());
          n2 += v * v;
        }
      }
      const double r = std::pow(rng.uniform(), 1.0 / static_cast<double>(dim)) / std::sqrt(n2);
      for (auto& v : off) v *= r;
      for (std::size_t j = 0; j < dim; ++j) p[j] += radius * off[j];
      c.ids.push_back("c" + std::to_string(k) + "_" + std::to_string(i));
      c.labels.push_back("L" + std::to_string(k));
      c.points.push_back(std::move(p));
    }
  }
  return c;
}

}  // namespace seqvec::testing
