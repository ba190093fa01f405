#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>

#include "colm/metrics.hpp"

namespace colm::metrics {
namespace {

constexpr std::size_t kMaxOrder = 4;

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts count_ngrams(const std::vector<std::string>& tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

}  // namespace

double brevity_penalty(std::size_t candidate_length, std::size_t reference_length) {
  if (candidate_length == 0) return 0.0;
  if (candidate_length >= reference_length) return 1.0;
  return std::exp(1.0 - static_cast<double>(reference_length) /
                            static_cast<double>(candidate_length));
}

double bleu(std::string_view candidate, const std::vector<std::string>& references) {
  const auto cand = tokenize(candidate);
  if (cand.empty() || references.empty()) return 0.0;

  std::vector<std::vector<std::string>> refs;
  refs.reserve(references.size());
  for (const auto& r : references) refs.push_back(tokenize(r));

  double log_sum = 0.0;
  for (std::size_t n = 1; n <= kMaxOrder; ++n) {
    const NgramCounts cand_counts = count_ngrams(cand, n);
    NgramCounts max_ref;
    for (const auto& ref : refs) {
      for (const auto& [gram, c] : count_ngrams(ref, n)) {
        auto& slot = max_ref[gram];
        slot = std::max(slot, c);
      }
    }
    std::size_t clipped = 0;
    std::size_t total = 0;
    for (const auto& [gram, c] : cand_counts) {
      total += c;
      auto it = max_ref.find(gram);
      if (it != max_ref.end()) clipped += std::min(c, it->second);
    }
    const double numerator = clipped == 0 ? kBleuEpsilon : static_cast<double>(clipped);
    const double denominator = total == 0 ? 1.0 : static_cast<double>(total);
    log_sum += std::log(numerator / denominator);
  }

  std::size_t closest = refs.front().size();
  for (const auto& ref : refs) {
    const auto diff = [&](std::size_t len) {
      return len > cand.size() ? len - cand.size() : cand.size() - len;
    };
    if (diff(ref.size()) < diff(closest) || (diff(ref.size()) == diff(closest) && ref.size() < closest)) {
      closest = ref.size();
    }
  }
  return brevity_penalty(cand.size(), closest) * std::exp(log_sum / static_cast<double>(kMaxOrder));
}

}  // namespace colm::metrics
