#include <gtest/gtest.h>

#include "colm/prompts.hpp"
#include "test_support.hpp"

namespace colm::pipeline {
namespace {

using colm::testing::source_path;

const char* kSpec =
    "### module\nM2\n\n"
    "### instruction\nJudge it.\n\n"
    "### query\nFacts:\n{facts}\nRule: {rule}\nAnswer:\n\n"
    "### example\nfact: F one.\nfact: F two.\nrule: R ex.\nanswer: yes\n\n"
    "### example\nfact: G.\nrule: S ex.\nanswer: no\n";

corpus::FactInput facts(std::vector<std::string> texts) {
  corpus::FactInput f;
  f.texts = std::move(texts);
  return f;
}

TEST(Prompts, ParseSections) {
  const auto spec = parse_prompt_spec(kSpec);
  EXPECT_EQ(spec.module_id, ModuleId::kM2);
  EXPECT_EQ(spec.instruction_text, "Judge it.");
  EXPECT_EQ(spec.query_layout, "Facts:\n{facts}\nRule: {rule}\nAnswer:");
  ASSERT_EQ(spec.few_shot_examples.size(), 2u);
  EXPECT_EQ(spec.few_shot_examples[0].facts, (std::vector<std::string>{"F one.", "F two."}));
  EXPECT_EQ(spec.few_shot_examples[1].answer, "no");
  EXPECT_TRUE(spec.has_slot(kRuleSlot));
  EXPECT_FALSE(spec.has_slot(kTemplateSlot));
}

TEST(Prompts, AssembleExactLayout) {
  const auto spec = parse_prompt_spec(kSpec);
  const std::string expected =
      "Judge it.\n\n"
      "Facts:\n1. F one.\n2. F two.\nRule: R ex.\nAnswer: yes\n\n"
      "Facts:\n1. G.\nRule: S ex.\nAnswer: no\n\n"
      "Facts:\n1. Alpha beta.\nRule: A rule.\nAnswer:";
  EXPECT_EQ(assemble_prompt(spec, facts({"Alpha\n beta."}), std::string("A  rule."), std::nullopt),
            expected);
}

TEST(Prompts, FewShotCountLimitsExamples) {
  auto spec = parse_prompt_spec(kSpec);
  spec.few_shot_count = 0;
  EXPECT_EQ(assemble_prompt(spec, facts({"x"}), std::string("r"), std::nullopt),
            "Judge it.\n\nFacts:\n1. x\nRule: r\nAnswer:");
}

TEST(Prompts, PlaceholdersInSuppliedTextAreNotExpanded) {
  auto spec = parse_prompt_spec(kSpec);
  spec.few_shot_count = 0;
  const auto p = assemble_prompt(spec, facts({"{rule}"}), std::string("{facts}"), std::nullopt);
  EXPECT_EQ(p, "Judge it.\n\nFacts:\n1. {rule}\nRule: {facts}\nAnswer:");
}

TEST(Prompts, MissingSlotsThrow) {
  const auto spec = parse_prompt_spec(kSpec);
  EXPECT_THROW(assemble_prompt(spec, facts({}), std::string("r"), std::nullopt), PipelineError);
  EXPECT_THROW(assemble_prompt(spec, facts({"x"}), std::nullopt, std::nullopt), PipelineError);
}

TEST(Prompts, ValidateRejectsWrongSlots) {
  auto spec = parse_prompt_spec(kSpec);
  spec.module_id = ModuleId::kM3;  // fact-independent modules must not take facts
  EXPECT_THROW(spec.validate(), PipelineError);
  EXPECT_THROW(parse_prompt_spec("### module\nM9\n### instruction\nx\n### query\n{rule}\n"),
               PipelineError);
}

TEST(Prompts, RenderFacts) {
  EXPECT_EQ(render_facts({"a", "b  c"}), "1. a\n2. b c");
  EXPECT_EQ(render_facts({}), "");
}

TEST(Prompts, ShippedPromptDirectoryLoads) {
  const auto set = load_prompt_dir(source_path("prompts"));
  ASSERT_EQ(set.size(), 5u);
  for (const auto& [id, spec] : set) {
    EXPECT_EQ(spec.module_id, id);
    EXPECT_NO_THROW(spec.validate());
    EXPECT_FALSE(spec.few_shot_examples.empty());
  }
  EXPECT_TRUE(set.at(ModuleId::kM1).has_slot(kTemplateSlot));
  EXPECT_FALSE(set.at(ModuleId::kM3).has_slot(kFactsSlot));
  EXPECT_FALSE(set.at(ModuleId::kM5).has_slot(kFactsSlot));
}

TEST(Prompts, M1UsesRuleAsDemonstrationAnswer) {
  const auto set = load_prompt_dir(source_path("prompts"));
  const auto& m1 = set.at(ModuleId::kM1);
  const auto p = assemble_prompt(m1, facts({"x"}), std::nullopt,
                                 templates::template_for(RuleType::kUnivImpl));
  EXPECT_NE(p.find(m1.few_shot_examples[0].rule), std::string::npos);
  EXPECT_TRUE(p.ends_with("Template: If <A>, then <B>.\nRule:"));
}

}  // namespace
}  // namespace colm::pipeline
