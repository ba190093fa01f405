#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "colm/corpus.hpp"
#include "colm/error.hpp"
#include "colm/module_id.hpp"
#include "colm/templates.hpp"

namespace colm::pipeline {

class PipelineError : public Error {
 public:
  using Error::Error;
};

struct FewShotExample {
  std::vector<std::string> facts;
  std::string rule_template;  // surface form, M1 only
  std::string rule;
  std::string answer;  // "yes"/"no" for verifiers; M1 uses `rule` as the answer
};

// A module's prompt: instruction, demonstrations, and a query layout with
// the placeholders {facts}, {template} and {rule}.
struct PromptSpec {
  ModuleId module_id = ModuleId::kM1;
  std::string instruction_text;
  std::string query_layout;
  std::vector<FewShotExample> few_shot_examples;
  // Number of demonstrations to include; nullopt means all of them.
  std::optional<std::size_t> few_shot_count;

  bool has_slot(std::string_view placeholder) const;

  // M1 needs {facts} and {template}; M2/M4 need {facts} and {rule}; M3/M5
  // need {rule} and must not mention {facts}.
  void validate() const;
};

inline constexpr std::string_view kFactsSlot = "{facts}";
inline constexpr std::string_view kTemplateSlot = "{template}";
inline constexpr std::string_view kRuleSlot = "{rule}";

// Prompt file format: sections introduced by "### <name>" lines. Sections
// are `module`, `instruction`, `query`, and any number of `example`
// sections made of "fact:", "template:", "rule:" and "answer:" lines.
PromptSpec parse_prompt_spec(std::string_view text);
PromptSpec load_prompt_spec(const std::filesystem::path& path);

using PromptSet = std::map<ModuleId, PromptSpec>;

// Loads m1.txt .. m5.txt from `dir`.
PromptSet load_prompt_dir(const std::filesystem::path& dir);

// "1. first fact\n2. second fact"
std::string render_facts(const std::vector<std::string>& facts);

// instruction, blank line, demonstrations (each followed by its answer)
// separated by blank lines, blank line, then the query with the supplied
// facts/template/rule. Throws PipelineError when a slot the module needs is
// not supplied.
std::string assemble_prompt(const PromptSpec& spec, const corpus::FactInput& facts,
                            const std::optional<std::string>& rule,
                            const std::optional<templates::RuleTemplate>& tmpl);

}  // namespace colm::pipeline
