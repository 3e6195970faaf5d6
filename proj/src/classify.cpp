#include "seqvec/classify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "seqvec/error.hpp"
#include "seqvec/random.hpp"

namespace seqvec {

namespace {

constexpr std::uint64_t kNegativeStream = 0x4e4547ULL;
constexpr std::uint64_t kFoldStream = 0x464f4c44ULL;
constexpr std::uint64_t kSvmStream = 0x53564dULL;

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::optional<double> ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

Matrix<double> select_rows(const Matrix<double>& x, std::span<const std::size_t> rows) {
  Matrix<double> out(rows.size(), x.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    auto src = x.row(rows[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

// Collects per-fold metric values, skipping undefined ones.
struct FoldMetrics {
  std::vector<double> specificity, sensitivity, accuracy, precision;
  std::size_t undefined_specificity = 0, undefined_sensitivity = 0, undefined_precision = 0;

  void add(const Metrics& m) {
    auto push = [](const std::optional<double>& v, std::vector<double>& into, std::size_t& missing) {
      if (v)
        into.push_back(*v);
      else
        ++missing;
    };
    std::size_t unused = 0;
    push(m.specificity, specificity, undefined_specificity);
    push(m.sensitivity, sensitivity, undefined_sensitivity);
    push(m.precision, precision, undefined_precision);
    push(m.accuracy, accuracy, unused);
  }

  MetricsReport finish(std::size_t folds) const {
    MetricsReport r;
    r.folds = folds;
    r.specificity = summarize(specificity);
    r.sensitivity = summarize(sensitivity);
    r.accuracy = summarize(accuracy);
    r.precision = summarize(precision);
    auto warn = [&](std::size_t n, const char* name) {
      if (n > 0)
        r.warnings.push_back(std::string(name) + " undefined (0/0) in " + std::to_string(n) +
                             " fold(s); excluded from the mean");
    };
    warn(undefined_specificity, "specificity");
    warn(undefined_sensitivity, "sensitivity");
    warn(undefined_precision, "precision");
    return r;
  }
};

}  // namespace

Metrics metrics_from_counts(const ConfusionCounts& c) {
  if (c.total() == 0) throw DataError("confusion counts are all zero");
  Metrics m;
  m.specificity = ratio(c.tn, c.tn + c.fp);
  m.sensitivity = ratio(c.tp, c.tp + c.fn);
  m.accuracy = ratio(c.tn + c.tp, c.total());
  m.precision = ratio(c.tp, c.tp + c.fp);
  return m;
}

double SvmModel::margin(std::span<const double> x) const {
  double s = bias;
  for (std::size_t i = 0; i < weights.size(); ++i) s += weights[i] * x[i];
  return s;
}

SvmModel train_linear_svm(const Matrix<double>& x, std::span<const int> y, const SvmOptions& options) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (!(options.C > 0.0)) throw ConfigError("SVM C must be positive");
  if (options.epochs == 0) throw ConfigError("SVM epochs must be at least 1");
  if (y.size() != n) throw DataError("SVM: label count does not match row count");
  if (n < 2) throw DataError("SVM needs at least two examples");
  bool has_pos = false;
  bool has_neg = false;
  for (int label : y) {
    if (label == 1)
      has_pos = true;
    else if (label == -1)
      has_neg = true;
    else
      throw DataError("SVM labels must be +1 or -1");
  }
  if (!has_pos || !has_neg) throw DataError("SVM needs both classes present");

  const double lambda = 1.0 / (static_cast<double>(n) * options.C);
  const double radius = 1.0 / std::sqrt(lambda);
  SvmModel model;
  model.C = options.C;
  model.weights.assign(d, 0.0);
  double& b = model.bias;
  auto& w = model.weights;

  // Averaged over the iterates of the second half of training.
  std::vector<double> w_avg(d, 0.0);
  double b_avg = 0.0;
  std::size_t averaged = 0;
  const std::size_t average_from = options.epochs / 2;

  Rng rng(options.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::uint64_t t = 0;
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    rng.shuffle(std::span(order));
    for (std::size_t i : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const auto xi = x.row(i);
      const double yi = y[i];
      const double m = yi * model.margin(xi);
      const double shrink = 1.0 - eta * lambda;
      for (auto& v : w) v *= shrink;
      b *= shrink;
      if (m < 1.0) {
        for (std::size_t j = 0; j < d; ++j) w[j] += eta * yi * xi[j];
        b += eta * yi;
      }
      double sq = b * b;
      for (double v : w) sq += v * v;
      const double nrm = std::sqrt(sq);
      if (nrm > radius) {
        const double s = radius / nrm;
        for (auto& v : w) v *= s;
        b *= s;
      }
      if (epoch >= average_from) {
        ++averaged;
        const double r = 1.0 / static_cast<double>(averaged);
        for (std::size_t j = 0; j < d; ++j) w_avg[j] += (w[j] - w_avg[j]) * r;
        b_avg += (b - b_avg) * r;
      }
    }
  }
  w = std::move(w_avg);
  b = b_avg;
  return model;
}

double svm_objective(const SvmModel& model, const Matrix<double>& x, std::span<const int> y) {
  double reg = model.bias * model.bias;
  for (double v : model.weights) reg += v * v;
  double hinge = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) hinge += std::max(0.0, 1.0 - y[i] * model.margin(x.row(i)));
  return 0.5 * reg + model.C * hinge;
}

std::vector<double> OneVsRestModel::margins(std::span<const double> x) const {
  if (classes.size() == 2 && models.size() == 1) {
    const double m = models[0].margin(x);
    return {m, -m};
  }
  std::vector<double> out;
  out.reserve(models.size());
  for (const auto& model : models) out.push_back(model.margin(x));
  return out;
}

const std::string& OneVsRestModel::predict(std::span<const double> x) const {
  const auto m = margins(x);
  std::size_t best = 0;
  for (std::size_t c = 1; c < m.size(); ++c)
    if (m[c] > m[best]) best = c;
  return classes[best];
}

OneVsRestModel one_vs_rest(const Matrix<double>& x, std::span<const std::string> y, const SvmOptions& options) {
  if (y.size() != x.rows()) throw DataError("one-vs-rest: label count does not match row count");
  std::set<std::string> distinct(y.begin(), y.end());
  if (distinct.size() < 2) throw DataError("one-vs-rest needs at least two classes");

  OneVsRestModel model;
  model.classes.assign(distinct.begin(), distinct.end());
  const std::size_t binary_models = model.classes.size() == 2 ? 1 : model.classes.size();
  std::vector<int> signs(y.size());
  for (std::size_t c = 0; c < binary_models; ++c) {
    for (std::size_t i = 0; i < y.size(); ++i) signs[i] = y[i] == model.classes[c] ? 1 : -1;
    SvmOptions opts = options;
    opts.seed = derive_seed(options.seed, kSvmStream, c);
    model.models.push_back(train_linear_svm(x, signs, opts));
  }
  return model;
}

LabeledDataset LabeledDataset::from_vectors(std::span<const std::string> ids, const Matrix<double>& features,
                                            const std::map<std::string, std::string>& labels) {
  if (ids.size() != features.rows()) throw DataError("id count does not match vector count");
  std::vector<std::size_t> rows;
  LabeledDataset out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto it = labels.find(ids[i]);
    if (it == labels.end()) continue;
    rows.push_back(i);
    out.ids.push_back(ids[i]);
    out.labels.push_back(it->second);
  }
  if (rows.empty()) throw DataError("no vector has a family label");
  out.features = select_rows(features, rows);
  return out;
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> rows) const {
  LabeledDataset out;
  out.features = select_rows(features, rows);
  for (std::size_t r : rows) {
    out.ids.push_back(ids[r]);
    out.labels.push_back(labels[r]);
  }
  return out;
}

std::vector<std::pair<std::string, std::size_t>> families_by_size(std::span<const std::string> labels) {
  std::map<std::string, std::size_t> counts;
  for (const auto& l : labels) ++counts[l];
  std::vector<std::pair<std::string, std::size_t>> out(counts.begin(), counts.end());
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

MetricsReport binary_family_protocol(const LabeledDataset& data, const std::string& family,
                                     const ProtocolOptions& options) {
  if (options.folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
  std::vector<std::size_t> positives;
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < data.size(); ++i) (data.labels[i] == family ? positives : pool).push_back(i);
  if (positives.size() < kMinBinaryFamilySize || positives.size() < options.folds)
    throw DataError("family '" + family + "' has " + std::to_string(positives.size()) + " members; at least " +
                    std::to_string(std::max(kMinBinaryFamilySize, options.folds)) + " are required");
  if (pool.size() < positives.size())
    throw DataError("family '" + family + "': only " + std::to_string(pool.size()) +
                    " sequences in other families, need " + std::to_string(positives.size()));

  // Partial Fisher-Yates: the first |positives| slots become the negatives.
  Rng rng(derive_seed(options.seed, kNegativeStream, fnv1a(family)));
  for (std::size_t i = 0; i < positives.size(); ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }

  std::vector<std::size_t> rows = positives;
  rows.insert(rows.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(positives.size()));
  std::vector<int> y(rows.size());
  std::vector<std::string> strata(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    y[i] = i < positives.size() ? 1 : -1;
    strata[i] = y[i] > 0 ? "+" : "-";
  }
  const Matrix<double> x = select_rows(data.features, rows);
  const auto fold = stratified_folds(strata, options.folds, derive_seed(options.seed, kFoldStream, fnv1a(family)));

  FoldMetrics metrics;
  for (std::size_t f = 0; f < options.folds; ++f) {
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
    for (std::size_t i = 0; i < rows.size(); ++i) (fold[i] == f ? test_rows : train_rows).push_back(i);
    std::vector<int> train_y;
    for (std::size_t i : train_rows) train_y.push_back(y[i]);
    SvmOptions svm = options.svm;
    svm.seed = derive_seed(options.seed, kSvmStream, f);
    const SvmModel model = train_linear_svm(select_rows(x, train_rows), train_y, svm);

    ConfusionCounts counts;
    for (std::size_t i : test_rows) {
      const int predicted = model.predict(x.row(i));
      if (y[i] > 0)
        (predicted > 0 ? counts.tp : counts.fn)++;
      else
        (predicted > 0 ? counts.fp : counts.tn)++;
    }
    metrics.add(metrics_from_counts(counts));
  }
  return metrics.finish(options.folds);
}

MulticlassReport multiclass_protocol(const LabeledDataset& data, std::size_t top_n, const ProtocolOptions& options) {
  if (options.folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
  if (top_n == 0) throw ConfigError("top-n must be at least 1");
  MulticlassReport report;
  auto ranked = families_by_size(data.labels);
  if (top_n > ranked.size()) {
    report.metrics.warnings.push_back("requested top " + std::to_string(top_n) + " families but only " +
                                      std::to_string(ranked.size()) + " exist; using all");
    top_n = ranked.size();
  }
  ranked.resize(top_n);
  if (ranked.size() < 2) throw DataError("multiclass evaluation needs at least 2 families");

  std::set<std::string> chosen;
  for (const auto& [family, n] : ranked) chosen.insert(family);
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (chosen.contains(data.labels[i])) rows.push_back(i);
  const LabeledDataset subset = data.subset(rows);
  report.classes.assign(chosen.begin(), chosen.end());

  const auto fold = stratified_folds(subset.labels, options.folds, derive_seed(options.seed, kFoldStream));
  FoldMetrics metrics;
  std::size_t evaluated_folds = 0;
  for (std::size_t f = 0; f < options.folds; ++f) {
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
    for (std::size_t i = 0; i < subset.size(); ++i) (fold[i] == f ? test_rows : train_rows).push_back(i);
    if (test_rows.empty()) continue;
    const LabeledDataset train_set = subset.subset(train_rows);
    SvmOptions svm = options.svm;
    svm.seed = derive_seed(options.seed, kSvmStream, f);
    const OneVsRestModel model = one_vs_rest(train_set.features, train_set.labels, svm);

    std::map<std::string, ConfusionCounts> per_class;
    for (const auto& c : report.classes) per_class[c];
    std::size_t correct = 0;
    for (std::size_t i : test_rows) {
      const std::string& truth = subset.labels[i];
      const std::string& predicted = model.predict(subset.features.row(i));
      if (predicted == truth) ++correct;
      for (auto& [c, counts] : per_class) {
        const bool is_true = c == truth;
        const bool is_pred = c == predicted;
        if (is_true && is_pred)
          ++counts.tp;
        else if (is_true)
          ++counts.fn;
        else if (is_pred)
          ++counts.fp;
        else
          ++counts.tn;
      }
    }

    // Macro averages over classes whose metric is defined in this fold.
    auto macro = [&](auto member) -> std::optional<double> {
      double sum = 0.0;
      std::size_t n = 0;
      for (const auto& [c, counts] : per_class) {
        if (auto v = metrics_from_counts(counts).*member) {
          sum += *v;
          ++n;
        }
      }
      if (n == 0) return std::nullopt;
      return sum / static_cast<double>(n);
    };
    Metrics fold_metrics;
    fold_metrics.specificity = macro(&Metrics::specificity);
    fold_metrics.sensitivity = macro(&Metrics::sensitivity);
    fold_metrics.precision = macro(&Metrics::precision);
    fold_metrics.accuracy = static_cast<double>(correct) / static_cast<double>(test_rows.size());
    metrics.add(fold_metrics);
    ++evaluated_folds;
  }
  auto warnings = std::move(report.metrics.warnings);
  report.metrics = metrics.finish(evaluated_folds);
  report.metrics.warnings.insert(report.metrics.warnings.begin(), warnings.begin(), warnings.end());
  return report;
}

}  // namespace seqvec
