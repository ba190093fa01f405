#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "colm/error.hpp"
#include "colm/tokenize.hpp"

namespace colm::metrics {

class MetricError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// METEOR

enum class Matcher { kExact, kStem };

struct MeteorParams {
  double alpha = 0.9;  // precision weight in Fmean
  double beta = 3.0;   // fragmentation penalty exponent
  double gamma = 0.5;  // fragmentation penalty weight
  std::vector<Matcher> matchers = {Matcher::kExact, Matcher::kStem};

  // Throws MetricError unless alpha, gamma are in [0,1] and beta > 0.
  void validate() const;
};

struct MeteorAlignment {
  // For each candidate position, the aligned reference position or -1.
  std::vector<int> candidate_to_reference;
  std::size_t matches = 0;
  std::size_t chunks = 0;
};

struct MeteorDetail {
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;
  std::size_t matches = 0;
  std::size_t chunks = 0;
  double precision = 0.0;
  double recall = 0.0;
  double fmean = 0.0;
  double penalty = 0.0;
  double score = 0.0;
};

// One-to-one unigram alignment built stage by stage (each matcher only sees
// tokens left unmatched by earlier stages). Within a stage, candidate tokens
// are visited from last to first and each takes the last free reference
// token with the same key. This reproduces the nltk scorer, so chunk counts
// match it rather than the chunk-minimizing search of the original METEOR.
MeteorAlignment align(std::span<const std::string> candidate,
                      std::span<const std::string> reference, const MeteorParams& params);

MeteorDetail meteor_detail(std::span<const std::string> candidate,
                           std::span<const std::string> reference,
                           const MeteorParams& params = {});

// METEOR of a candidate against a single reference, in [0,1].
double meteor(std::string_view candidate, std::string_view reference,
              const MeteorParams& params = {});

// ---------------------------------------------------------------------------
// BLEU

inline constexpr double kBleuEpsilon = 1e-9;

// e^(1 - r/c) when c < r, else 1. Zero when c == 0.
double brevity_penalty(std::size_t candidate_length, std::size_t reference_length);

// Sentence BLEU-4 with uniform weights and clipped counts. An n-gram order
// with no clipped matches contributes kBleuEpsilon in place of its
// numerator. The brevity penalty uses the closest reference length (shorter
// wins ties).
double bleu(std::string_view candidate, const std::vector<std::string>& references);

// ---------------------------------------------------------------------------
// WRecall and GREEN

inline constexpr std::array<double, 10> kWRecallWeights = {45,  35,  25,  15,  5,
                                                           -5, -15, -25, -35, -45};

struct ScoredRule {
  std::string rule_id;
  double meteor = 0.0;
  bool retained = false;
};

struct WRecallBreakdown {
  std::array<double, 10> block_weights = kWRecallWeights;
  std::array<double, 10> block_recalls{};
  std::array<std::size_t, 10> block_sizes{};
  double value = 0.0;
};

// Sorts rules by METEOR (descending, stable), cuts them into ten
// contiguous blocks (the first n mod 10 blocks one larger), and combines the
// per-block retention rates with the fixed linear weights, normalized so
// the value lies in [0,1]. Requires at least 10 rules.
WRecallBreakdown wrecall(std::span<const ScoredRule> rules);

// Geometric mean of METEOR (on the x100 scale) and WRecall.
double green(double meteor_scaled, double wrecall);

// ---------------------------------------------------------------------------
// Human labels

struct HumanLabels {
  int consistent = 0;  // 0..2
  int reality = 0;     // 0..2
  int general = 0;     // 0..2
  int nontrivial = 0;  // 0..1

  // Name of the first out-of-range field, or empty when all are valid.
  std::string invalid_field() const;
};

double normalize_three_point(int label);
double normalize_two_point(int label);

// Product of the four labels, each normalized to [0,1].
double aggregate_human(const HumanLabels& labels);

// ---------------------------------------------------------------------------
// Classification

struct ClassificationMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double average_precision = 0.0;
};

// Scores at or above `threshold` are predicted positive.
ClassificationMetrics classification_metrics(const std::vector<double>& scores,
                                             const std::vector<bool>& golds, double threshold);

// Step-function area under the precision/recall curve. Tied scores form a
// single operating point, so the result never depends on input order.
double average_precision(const std::vector<double>& scores, const std::vector<bool>& golds);

// ---------------------------------------------------------------------------
// Correlation

struct CorrelationResult {
  double r = 0.0;
  double p_two_tailed = 1.0;
  std::size_t n = 0;
};

// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction
// (absolute tolerance 1e-12, at most 300 iterations).
double regularized_incomplete_beta(double a, double b, double x);

// Two-tailed p-value of Student's t statistic with `dof` degrees of freedom.
double student_t_two_tailed(double t, double dof);

// Sample Pearson correlation with its two-tailed p-value. Requires equal
// lengths, n >= 3 and nonzero variance in both samples.
CorrelationResult pearson(std::span<const double> xs, std::span<const double> ys);

}  // namespace colm::metrics
