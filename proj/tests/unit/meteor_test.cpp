#include <gtest/gtest.h>

#include <fstream>
#include <json.hpp>
#include <random>

#include "colm/metrics.hpp"
#include "test_support.hpp"

namespace colm::metrics {
namespace {

// Closed form with alpha 0.9, beta 3, gamma 0.5.
double hand_meteor(double m, double c, double r, double chunks) {
  if (m == 0) return 0.0;
  const double p = m / c;
  const double rec = m / r;
  const double fmean = p * rec / (0.9 * p + 0.1 * rec);
  return fmean * (1.0 - 0.5 * std::pow(chunks / m, 3.0));
}

struct HandCase {
  const char* candidate;
  const char* reference;
  double expected;
};

TEST(Meteor, HandComputedCases) {
  const HandCase cases[] = {
      {"the cat sat", "the cat sat", hand_meteor(3, 3, 3, 1)},  // 0.981481
      {"cats", "cats", 0.5},
      {"cats", "cat", 0.5},  // stem stage
      {"dog", "bird", 0.0},
      // "the" takes the later reference "the", splitting the match.
      {"the cat", "the cat sat on the mat", hand_meteor(2, 2, 6, 2)},
      {"cat sat", "the cat sat on the mat", hand_meteor(2, 2, 6, 1)},
      {"b a", "a b", 0.5},
      {"a b c d", "c d a b", hand_meteor(4, 4, 4, 2)},
      {"the the", "the", hand_meteor(1, 2, 1, 1)},
      // Last-to-first alignment: the final "a" takes the reference "a", so
      // the matches form two chunks.
      {"a b a", "a b", hand_meteor(2, 3, 2, 2)},
      {"running dogs", "run dog", hand_meteor(2, 2, 2, 1)},
      {"The Cat", "the cat", hand_meteor(2, 2, 2, 1)},
      {"", "the cat", 0.0},
  };
  EXPECT_NEAR(hand_meteor(3, 3, 3, 1), 0.981481, 1e-6);
  for (const auto& c : cases) {
    EXPECT_NEAR(meteor(c.candidate, c.reference), c.expected, 1e-9)
        << c.candidate << " | " << c.reference;
  }
}

TEST(Meteor, ExactStageRunsBeforeStem) {
  // "cats" must align exactly to "cats", leaving "cat" for nothing.
  const std::vector<std::string> cand = {"cats"};
  const std::vector<std::string> ref = {"cat", "cats"};
  const auto a = align(cand, ref, {});
  EXPECT_EQ(a.candidate_to_reference, (std::vector<int>{1}));
}

TEST(Meteor, AlignmentTakesLastFreeReferenceToken) {
  const std::vector<std::string> cand = {"a", "b", "a", "b"};
  const std::vector<std::string> ref = {"a", "x", "a", "b"};
  const auto a = align(cand, ref, {});
  EXPECT_EQ(a.candidate_to_reference, (std::vector<int>{0, -1, 2, 3}));
  EXPECT_EQ(a.matches, 3u);
  EXPECT_EQ(a.chunks, 2u);
}

TEST(Meteor, DetailFields) {
  const std::vector<std::string> cand = {"the", "cat"};
  const std::vector<std::string> ref = {"the", "cat", "sat", "down"};
  const auto d = meteor_detail(cand, ref);
  EXPECT_EQ(d.matches, 2u);
  EXPECT_EQ(d.chunks, 1u);
  EXPECT_DOUBLE_EQ(d.precision, 1.0);
  EXPECT_DOUBLE_EQ(d.recall, 0.5);
  EXPECT_NEAR(d.score, hand_meteor(2, 2, 4, 1), 1e-12);
}

TEST(Meteor, ParamsValidate) {
  MeteorParams p;
  p.alpha = 1.5;
  EXPECT_THROW(p.validate(), MetricError);
  p = {};
  p.beta = 0;
  EXPECT_THROW(p.validate(), MetricError);
  EXPECT_NO_THROW(MeteorParams{}.validate());
}

TEST(Meteor, ExactOnlyMatcherSkipsStems) {
  MeteorParams p;
  p.matchers = {Matcher::kExact};
  EXPECT_EQ(meteor("cats", "cat", p), 0.0);
}

// Property: scores stay in [0,1) and identical inputs of length n score
// 1 - 0.5 / n^3.
TEST(Meteor, RangeProperty) {
  std::mt19937_64 rng(11);
  const std::vector<std::string> vocab = {"a", "b", "c", "d", "e", "cat", "cats", "run", "running"};
  for (int trial = 0; trial < 300; ++trial) {
    std::string cand, ref;
    const int nc = static_cast<int>(rng() % 8), nr = 1 + static_cast<int>(rng() % 8);
    for (int i = 0; i < nc; ++i) cand += vocab[rng() % vocab.size()] + " ";
    for (int i = 0; i < nr; ++i) ref += vocab[rng() % vocab.size()] + " ";
    const double s = meteor(cand, ref);
    EXPECT_GE(s, 0.0);
    EXPECT_LT(s, 1.0);
  }
  for (int n = 1; n <= 8; ++n) {
    std::string s;
    for (int i = 0; i < n; ++i) s += "w" + std::to_string(i) + " ";
    EXPECT_NEAR(meteor(s, s), 1.0 - 0.5 / std::pow(n, 3), 1e-12);
  }
}

// Frozen output of an independent reference implementation (nltk with a
// no-synonym WordNet stub).
TEST(Meteor, MatchesReferenceImplementation) {
  std::ifstream in(colm::testing::source_path("tests/data/meteor_reference.jsonl"));
  ASSERT_TRUE(in);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    const double expected = j["meteor"].get<double>();
    EXPECT_NEAR(meteor(j["candidate"].get<std::string>(), j["reference"].get<std::string>()),
                expected, 0.02)
        << line;
    ++n;
  }
  EXPECT_EQ(n, 50);
}

}  // namespace
}  // namespace colm::metrics
