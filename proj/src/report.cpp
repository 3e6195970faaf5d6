#include "seqvec/report.hpp"

#include <cstdio>
#include <ostream>

namespace seqvec {

namespace {

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * v);
  return buf;
}

void put_summary(std::ostream& out, const Summary& s) {
  if (s.n == 0)
    out << "\tNA\tNA";
  else
    out << '\t' << percent(s.mean) << '\t' << percent(s.std);
}

}  // namespace

void write_knn_report(std::ostream& out, const KnnReport& report) {
  out << "k\tAccuracy(%)\tAccuracy_std(%)\n";
  for (const auto& r : report.results) {
    out << r.k;
    put_summary(out, r.accuracy);
    out << '\n';
  }
}

void write_binary_report(std::ostream& out, const std::vector<std::pair<std::string, MetricsReport>>& rows,
                         const std::vector<std::size_t>& sizes) {
  out << "Family\tSize\tSpecificity(%)\tSpecificity_std(%)\tSensitivity(%)\tSensitivity_std(%)"
         "\tAccuracy(%)\tAccuracy_std(%)\n";
  std::vector<double> spec;
  std::vector<double> sens;
  std::vector<double> acc;
  std::size_t total = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& [family, m] = rows[i];
    out << family << '\t' << sizes.at(i);
    put_summary(out, m.specificity);
    put_summary(out, m.sensitivity);
    put_summary(out, m.accuracy);
    out << '\n';
    total += sizes[i];
    if (m.specificity.n) spec.push_back(m.specificity.mean);
    if (m.sensitivity.n) sens.push_back(m.sensitivity.mean);
    if (m.accuracy.n) acc.push_back(m.accuracy.mean);
  }
  if (rows.size() > 1) {
    out << "ALL\t" << total;
    put_summary(out, summarize(spec));
    put_summary(out, summarize(sens));
    put_summary(out, summarize(acc));
    out << '\n';
  }
}

void write_multiclass_report(std::ostream& out, const MulticlassReport& report) {
  out << "Classes\tPrecision(%)\tPrecision_std(%)\tSensitivity(%)\tSensitivity_std(%)"
         "\tSpecificity(%)\tSpecificity_std(%)\tAccuracy(%)\tAccuracy_std(%)\n";
  out << report.classes.size();
  put_summary(out, report.metrics.precision);
  put_summary(out, report.metrics.sensitivity);
  put_summary(out, report.metrics.specificity);
  put_summary(out, report.metrics.accuracy);
  out << '\n';
}

}  // namespace seqvec
