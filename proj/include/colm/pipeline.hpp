#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "colm/backend.hpp"
#include "colm/corpus.hpp"
#include "colm/module_id.hpp"
#include "colm/prompts.hpp"
#include "colm/templates.hpp"
#include "colm/tuning.hpp"

namespace colm::pipeline {

// Distinct candidates of one run get request seeds seed * stride + index.
inline constexpr std::uint64_t kRequestSeedStride = 1u << 20;

struct GeneratedRule {
  std::string rule_id;
  std::string deer_id;
  std::string text;
  std::size_t token_count = 0;
  bool token_count_fallback = true;  // counted with metrics::tokenize
  std::map<ModuleId, double> scores;  // verifier scores, M2..M5
  std::optional<double> combined;    // product of scores; unset when none
  bool verdict = false;
  bool prefiltered = false;
  std::uint64_t seed = 0;
  corpus::FactVariant variant = corpus::FactVariant::kShort3;

  bool operator==(const GeneratedRule&) const = default;
};

std::string to_json_line(const GeneratedRule& rule);
GeneratedRule parse_generated_rule(std::string_view line);
std::vector<GeneratedRule> load_generated_rules(const std::filesystem::path& path);
void save_generated_rules(const std::filesystem::path& path, std::span<const GeneratedRule> rules);

struct ProposerConfig {
  double temperature = 0.9;
  int max_new_tokens = 96;
  std::vector<std::string> stop_sequences = {"\n\n"};
  // Rules with at most this many tokens are trivial and skip verification.
  std::size_t prefilter_tokens = 45;
};

struct Proposals {
  std::vector<GeneratedRule> rules;
  std::size_t dropped = 0;  // candidates lost to backend errors or empty text
  std::vector<std::string> errors;
};

// Requests k completions of the M1 prompt. Failed candidates are dropped
// and counted rather than aborting the batch.
Proposals propose_rules(const backend::CompletionBackend& backend, const PromptSpec& m1,
                        const corpus::FactInput& facts, const templates::RuleTemplate& tmpl,
                        int k, std::uint64_t seed, const std::string& deer_id,
                        const ProposerConfig& config = {});

// Yes/no score of one verifier on one rule. Throws PipelineError when the
// rule is prefiltered or `module` is not a verifier.
double verify(const backend::CompletionBackend& backend, const PromptSpec& spec,
              const GeneratedRule& rule, const corpus::FactInput& facts, ModuleId module);

// Product of the scores (1 for an empty map).
double compose(const std::map<ModuleId, double>& scores);

// True when the rule is not prefiltered and every active module's score
// reaches its threshold. Throws PipelineError on a missing score or
// threshold for an active module.
bool passes(const GeneratedRule& rule, const tuning::ThresholdSet& thresholds,
            const std::set<ModuleId>& active);

// Retained rules in input order, with verdict set.
std::vector<GeneratedRule> filter_rules(std::span<const GeneratedRule> rules,
                                        const tuning::ThresholdSet& thresholds,
                                        const std::set<ModuleId>& active);

// Sets verdict on every rule in place.
void apply_verdicts(std::vector<GeneratedRule>& rules, const tuning::ThresholdSet& thresholds,
                    const std::set<ModuleId>& active);

// Proposer plus verifiers over one backend.
class Colm {
 public:
  Colm(const backend::CompletionBackend& backend, PromptSet prompts, ProposerConfig config = {},
       int max_parallel = 4);

  Proposals propose(const corpus::FactInput& facts, const templates::RuleTemplate& tmpl, int k,
                    std::uint64_t seed, const std::string& deer_id) const;

  // Fills scores and `combined` for every non-prefiltered rule, running the
  // (rule, module) calls in parallel. Backend errors propagate.
  void score(std::vector<GeneratedRule>& rules, const corpus::FactInput& facts,
             const std::set<ModuleId>& modules) const;

  double verify(const GeneratedRule& rule, const corpus::FactInput& facts, ModuleId module) const;

  const PromptSet& prompts() const { return prompts_; }
  const ProposerConfig& config() const { return config_; }
  int max_parallel() const { return max_parallel_; }

 private:
  const backend::CompletionBackend& backend_;
  PromptSet prompts_;
  ProposerConfig config_;
  int max_parallel_;
};

}  // namespace colm::pipeline
