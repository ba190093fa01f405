#include <algorithm>
#include <cmath>
#include <numeric>

#include "colm/metrics.hpp"

namespace colm::metrics {

WRecallBreakdown wrecall(std::span<const ScoredRule> rules) {
  constexpr std::size_t kBlocks = 10;
  const std::size_t n = rules.size();
  if (n < kBlocks) {
    throw MetricError("wrecall needs at least 10 rules, got " + std::to_string(n));
  }
  for (const auto& r : rules) {
    if (!std::isfinite(r.meteor)) throw MetricError("non-finite meteor for rule " + r.rule_id);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return rules[a].meteor > rules[b].meteor;
  });

  WRecallBreakdown out;
  const std::size_t base = n / kBlocks;
  const std::size_t extra = n % kBlocks;
  std::size_t cursor = 0;
  double weighted = 0.0;
  for (std::size_t b = 0; b < kBlocks; ++b) {
    const std::size_t size = base + (b < extra ? 1 : 0);
    std::size_t kept = 0;
    for (std::size_t i = cursor; i < cursor + size; ++i) {
      if (rules[order[i]].retained) ++kept;
    }
    cursor += size;
    out.block_sizes[b] = size;
    out.block_recalls[b] = static_cast<double>(kept) / static_cast<double>(size);
    weighted += out.block_weights[b] * out.block_recalls[b];
  }
  out.value = (weighted + 125.0) / 250.0;
  return out;
}

double green(double meteor_scaled, double wrecall_value) {
  if (!(meteor_scaled >= 0.0) || !std::isfinite(meteor_scaled)) {
    throw MetricError("green needs a nonnegative METEOR");
  }
  if (!(wrecall_value >= 0.0 && wrecall_value <= 1.0)) {
    throw MetricError("green needs WRecall in [0,1]");
  }
  return std::sqrt(meteor_scaled * wrecall_value);
}

}  // namespace colm::metrics
