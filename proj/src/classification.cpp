#include <algorithm>
#include <numeric>

#include "colm/metrics.hpp"

namespace colm::metrics {

std::string HumanLabels::invalid_field() const {
  if (consistent < 0 || consistent > 2) return "label_consistent";
  if (reality < 0 || reality > 2) return "label_reality";
  if (general < 0 || general > 2) return "label_general";
  if (nontrivial < 0 || nontrivial > 1) return "label_nontrivial";
  return {};
}

double normalize_three_point(int label) {
  if (label < 0 || label > 2) throw MetricError("3-point label out of range");
  return static_cast<double>(label) / 2.0;
}

double normalize_two_point(int label) {
  if (label < 0 || label > 1) throw MetricError("2-point label out of range");
  return static_cast<double>(label);
}

double aggregate_human(const HumanLabels& labels) {
  if (auto field = labels.invalid_field(); !field.empty()) {
    throw MetricError(field + " out of range");
  }
  return normalize_three_point(labels.consistent) * normalize_three_point(labels.reality) *
         normalize_three_point(labels.general) * normalize_two_point(labels.nontrivial);
}

ClassificationMetrics classification_metrics(const std::vector<double>& scores,
                                             const std::vector<bool>& golds, double threshold) {
  if (scores.size() != golds.size()) throw MetricError("scores and golds differ in length");
  if (scores.empty()) throw MetricError("classification metrics need at least one item");

  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (predicted && golds[i]) ++tp;
    else if (predicted) ++fp;
    else if (golds[i]) ++fn;
    else ++tn;
  }
  ClassificationMetrics m;
  m.accuracy = static_cast<double>(tp + tn) / static_cast<double>(scores.size());
  m.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  m.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  m.f1 = m.precision + m.recall == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  m.average_precision = average_precision(scores, golds);
  return m;
}

double average_precision(const std::vector<double>& scores, const std::vector<bool>& golds) {
  if (scores.size() != golds.size()) throw MetricError("scores and golds differ in length");
  const auto positives = static_cast<std::size_t>(std::count(golds.begin(), golds.end(), true));
  if (positives == 0) return 0.0;

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  double ap = 0.0;
  double prev_recall = 0.0;
  std::size_t tp = 0;
  std::size_t seen = 0;
  for (std::size_t i = 0; i < order.size();) {
    // Consume every item tied at this score as one operating point.
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      if (golds[order[j]]) ++tp;
      ++seen;
      ++j;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(positives);
    const double precision = static_cast<double>(tp) / static_cast<double>(seen);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return ap;
}

}  // namespace colm::metrics
