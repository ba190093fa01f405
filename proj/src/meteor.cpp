#include <cmath>

#include "colm/metrics.hpp"
#include "colm/porter_stemmer.hpp"

namespace colm::metrics {
namespace {

std::size_t count_chunks(const std::vector<int>& cand_to_ref) {
  std::size_t chunks = 0;
  int prev = -2;
  for (int r : cand_to_ref) {
    if (r >= 0 && (prev < 0 || r != prev + 1)) ++chunks;
    prev = r;
  }
  return chunks;
}

// One matcher stage over the still-unaligned positions. Candidates are
// visited last to first and each takes the last free reference token with
// the same key, the order used by the widely deployed nltk scorer.
void greedy_stage(const std::vector<std::string>& cand_keys,
                  const std::vector<std::string>& ref_keys, std::vector<int>& cand_to_ref,
                  std::vector<bool>& ref_used) {
  for (std::size_t i = cand_keys.size(); i-- > 0;) {
    if (cand_to_ref[i] >= 0) continue;
    for (std::size_t j = ref_keys.size(); j-- > 0;) {
      if (ref_used[j] || ref_keys[j] != cand_keys[i]) continue;
      cand_to_ref[i] = static_cast<int>(j);
      ref_used[j] = true;
      break;
    }
  }
}

std::vector<std::string> keys_for(std::span<const std::string> tokens, Matcher matcher) {
  std::vector<std::string> keys;
  keys.reserve(tokens.size());
  for (const auto& t : tokens) {
    keys.push_back(matcher == Matcher::kStem ? porter_stem(t) : t);
  }
  return keys;
}

}  // namespace

void MeteorParams::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw MetricError("meteor alpha must lie in [0,1]");
  if (!(beta > 0.0)) throw MetricError("meteor beta must be positive");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw MetricError("meteor gamma must lie in [0,1]");
  if (matchers.empty()) throw MetricError("meteor needs at least one matcher stage");
}

MeteorAlignment align(std::span<const std::string> candidate,
                      std::span<const std::string> reference, const MeteorParams& params) {
  MeteorAlignment out;
  out.candidate_to_reference.assign(candidate.size(), -1);
  std::vector<bool> ref_used(reference.size(), false);
  for (Matcher m : params.matchers) {
    const auto cand_keys = keys_for(candidate, m);
    const auto ref_keys = keys_for(reference, m);
    greedy_stage(cand_keys, ref_keys, out.candidate_to_reference, ref_used);
  }
  for (int r : out.candidate_to_reference) {
    if (r >= 0) ++out.matches;
  }
  out.chunks = count_chunks(out.candidate_to_reference);
  return out;
}

MeteorDetail meteor_detail(std::span<const std::string> candidate,
                           std::span<const std::string> reference, const MeteorParams& params) {
  params.validate();
  MeteorDetail d;
  d.candidate_length = candidate.size();
  d.reference_length = reference.size();
  if (candidate.empty() || reference.empty()) return d;

  const MeteorAlignment a = align(candidate, reference, params);
  d.matches = a.matches;
  d.chunks = a.chunks;
  if (a.matches == 0) return d;

  const double m = static_cast<double>(a.matches);
  d.precision = m / static_cast<double>(candidate.size());
  d.recall = m / static_cast<double>(reference.size());
  d.fmean = d.precision * d.recall /
            (params.alpha * d.precision + (1.0 - params.alpha) * d.recall);
  d.penalty = params.gamma * std::pow(static_cast<double>(a.chunks) / m, params.beta);
  d.score = d.fmean * (1.0 - d.penalty);
  return d;
}

double meteor(std::string_view candidate, std::string_view reference, const MeteorParams& params) {
  const auto cand = tokenize(candidate);
  const auto ref = tokenize(reference);
  return meteor_detail(cand, ref, params).score;
}

}  // namespace colm::metrics
