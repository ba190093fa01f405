#include <gtest/gtest.h>

#include <atomic>
#include <random>
#include <thread>

#include "colm/pipeline.hpp"
#include "test_support.hpp"

namespace colm::pipeline {
namespace {

using backend::CompletionRequest;
using backend::CompletionResponse;
using colm::testing::FakeBackend;
using colm::testing::source_path;
using colm::testing::words;
using colm::testing::yes_no_response;

PromptSet prompts() { return load_prompt_dir(source_path("prompts")); }

corpus::FactInput facts() {
  corpus::FactInput f;
  f.texts = {"Fact one.", "Fact two.", "Fact three."};
  return f;
}

GeneratedRule rule_with(std::map<ModuleId, double> scores, bool prefiltered = false) {
  GeneratedRule r;
  r.rule_id = "d/short3/s0/0";
  r.scores = std::move(scores);
  r.prefiltered = prefiltered;
  return r;
}

TEST(Propose, SeedsIdsAndPrefilter) {
  FakeBackend fake([](const CompletionRequest& req) {
    CompletionResponse r;
    // Even seeds: a 10-word rule. Odd seeds: 50 words, then a stop.
    r.text = (*req.seed % 2 == 0 ? words(10) : words(50)) + "\n\nignored";
    return r;
  });
  const auto out = propose_rules(fake, prompts().at(ModuleId::kM1), facts(),
                                 templates::template_for(RuleType::kUnivImpl), 4, 3, "deer-7");
  ASSERT_EQ(out.rules.size(), 4u);
  EXPECT_EQ(out.dropped, 0u);
  const auto reqs = fake.requests();
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(*reqs[i].seed, 3 * kRequestSeedStride + i);
    EXPECT_EQ(reqs[i].temperature, 0.9);
    EXPECT_EQ(out.rules[i].rule_id, "deer-7/short3/s3/" + std::to_string(i));
    EXPECT_EQ(out.rules[i].token_count, i % 2 == 0 ? 10u : 50u);
    EXPECT_EQ(out.rules[i].prefiltered, i % 2 == 0);
    EXPECT_EQ(out.rules[i].text.find("ignored"), std::string::npos);
  }
}

TEST(Propose, BoundaryAt45Tokens) {
  for (std::size_t n : {44u, 45u, 46u}) {
    FakeBackend fake([n](const CompletionRequest&) {
      CompletionResponse r;
      r.text = words(n);
      return r;
    });
    const auto out = propose_rules(fake, prompts().at(ModuleId::kM1), facts(),
                                   templates::template_for(RuleType::kUnivImpl), 1, 0, "d");
    EXPECT_EQ(out.rules.at(0).prefiltered, n <= 45) << n;
  }
}

TEST(Propose, FailuresAreDroppedAndCounted) {
  FakeBackend fake([](const CompletionRequest& req) -> CompletionResponse {
    if (*req.seed == 1) throw backend::BackendError(backend::ErrorKind::kNetwork, "down");
    CompletionResponse r;
    r.text = *req.seed == 2 ? "  \n" : words(60);
    return r;
  });
  const auto out = propose_rules(fake, prompts().at(ModuleId::kM1), facts(),
                                 templates::template_for(RuleType::kUnivImpl), 3, 0, "d");
  EXPECT_EQ(out.rules.size(), 1u);
  EXPECT_EQ(out.dropped, 2u);
  EXPECT_EQ(out.errors.size(), 2u);
  EXPECT_THROW(propose_rules(fake, prompts().at(ModuleId::kM2), facts(),
                             templates::template_for(RuleType::kUnivImpl), 1, 0, "d"),
               PipelineError);
}

TEST(Verify, FactIndependentModulesSeeNoFacts) {
  FakeBackend fake([](const CompletionRequest&) { return yes_no_response(0.7); });
  const auto set = prompts();
  auto r = rule_with({});
  r.text = words(50);
  for (auto m : kVerifierModules) {
    EXPECT_NEAR(verify(fake, set.at(m), r, facts(), m), 0.7, 1e-12);
  }
  const auto reqs = fake.requests();
  ASSERT_EQ(reqs.size(), 4u);
  EXPECT_NE(reqs[0].prompt.find("Fact one."), std::string::npos);   // M2
  EXPECT_EQ(reqs[1].prompt.find("Fact one."), std::string::npos);   // M3
  EXPECT_NE(reqs[2].prompt.find("Fact one."), std::string::npos);   // M4
  EXPECT_EQ(reqs[3].prompt.find("Fact one."), std::string::npos);   // M5
}

TEST(Verify, RejectsPrefilteredAndProposer) {
  FakeBackend fake([](const CompletionRequest&) { return yes_no_response(0.7); });
  const auto set = prompts();
  EXPECT_THROW(verify(fake, set.at(ModuleId::kM2), rule_with({}, true), facts(), ModuleId::kM2),
               PipelineError);
  EXPECT_THROW(verify(fake, set.at(ModuleId::kM1), rule_with({}), facts(), ModuleId::kM1),
               PipelineError);
  EXPECT_THROW(verify(fake, set.at(ModuleId::kM3), rule_with({}), facts(), ModuleId::kM2),
               PipelineError);
  EXPECT_TRUE(fake.requests().empty());
}

// Property: with per-module thresholds, the combined verdict is the
// conjunction of the per-module verdicts.
TEST(Filter, ConjunctionIdentity) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto th = tuning::ThresholdSet::uniform(0.5);
  th.thresholds[ModuleId::kM2] = 0.3;
  th.thresholds[ModuleId::kM4] = 0.7;
  const std::set<ModuleId> active(std::begin(kVerifierModules), std::end(kVerifierModules));
  std::vector<GeneratedRule> rules;
  for (int i = 0; i < 200; ++i) {
    std::map<ModuleId, double> s;
    for (auto m : kVerifierModules) s[m] = u(rng);
    rules.push_back(rule_with(s, i % 10 == 0));
  }
  apply_verdicts(rules, th, active);
  std::size_t kept = 0;
  for (const auto& r : rules) {
    bool all = !r.prefiltered;
    for (auto m : kVerifierModules) all = all && r.scores.at(m) >= th.thresholds.at(m);
    EXPECT_EQ(r.verdict, all);
    kept += all;
  }
  EXPECT_EQ(filter_rules(rules, th, active).size(), kept);
}

TEST(Filter, InactiveModulesAreIgnoredAndMissingScoresThrow) {
  auto th = tuning::ThresholdSet::uniform(0.5);
  const auto r = rule_with({{ModuleId::kM2, 0.9}, {ModuleId::kM3, 0.1}});
  EXPECT_TRUE(passes(r, th, {ModuleId::kM2}));
  EXPECT_FALSE(passes(r, th, {ModuleId::kM2, ModuleId::kM3}));
  EXPECT_THROW(passes(r, th, {ModuleId::kM4}), PipelineError);
  EXPECT_TRUE(passes(rule_with({}), th, {}));
  EXPECT_FALSE(passes(rule_with({}, true), th, {}));
}

TEST(Compose, Product) {
  EXPECT_DOUBLE_EQ(compose({}), 1.0);
  EXPECT_DOUBLE_EQ(compose({{ModuleId::kM2, 0.5}, {ModuleId::kM3, 0.4}}), 0.2);
}

TEST(Colm, ScoreFillsCombinedAndBoundsConcurrency) {
  std::atomic<int> in_flight = 0, peak = 0;
  FakeBackend fake([&](const CompletionRequest&) {
    const int now = ++in_flight;
    int p = peak.load();
    while (now > p && !peak.compare_exchange_weak(p, now)) {}
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
    --in_flight;
    return yes_no_response(0.5);
  });
  Colm colm(fake, prompts(), {}, 3);
  std::vector<GeneratedRule> rules;
  for (int i = 0; i < 6; ++i) {
    auto r = rule_with({}, i == 0);
    r.text = words(50);
    rules.push_back(r);
  }
  const std::set<ModuleId> all(std::begin(kVerifierModules), std::end(kVerifierModules));
  colm.score(rules, facts(), all);
  EXPECT_FALSE(rules[0].combined.has_value());
  EXPECT_TRUE(rules[0].scores.empty());
  for (int i = 1; i < 6; ++i) {
    ASSERT_TRUE(rules[i].combined.has_value());
    EXPECT_NEAR(*rules[i].combined, 0.0625, 1e-12);
    EXPECT_NEAR(*rules[i].combined, compose(rules[i].scores), 1e-15);
  }
  EXPECT_EQ(fake.requests().size(), 20u);
  EXPECT_LE(peak.load(), 3);
}

TEST(GeneratedRuleIo, RoundTrip) {
  auto r = rule_with({{ModuleId::kM2, 0.25}, {ModuleId::kM5, 0.5}});
  r.deer_id = "d";
  r.text = "If \"quoted\", then é.";
  r.token_count = 9;
  r.combined = 0.125;
  r.verdict = true;
  r.seed = 4;
  r.variant = corpus::FactVariant::kShort3Missing;
  EXPECT_EQ(parse_generated_rule(to_json_line(r)), r);
  auto bare = rule_with({});
  EXPECT_EQ(parse_generated_rule(to_json_line(bare)), bare);

  colm::testing::TempDir dir;
  const std::vector<GeneratedRule> rules = {r, bare};
  save_generated_rules(dir / "rules.jsonl", rules);
  EXPECT_EQ(load_generated_rules(dir / "rules.jsonl"), rules);
  EXPECT_THROW(parse_generated_rule("{}"), Error);
}

}  // namespace
}  // namespace colm::pipeline
