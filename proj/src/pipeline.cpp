#include "colm/pipeline.hpp"

#include <fstream>

#include <json.hpp>

#include "colm/parallel.hpp"
#include "colm/text.hpp"

namespace colm::pipeline {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

const PromptSpec& prompt_for(const PromptSet& prompts, ModuleId id) {
  auto it = prompts.find(id);
  if (it == prompts.end()) {
    throw PipelineError("no prompt loaded for " + std::string(to_string(id)));
  }
  return it->second;
}

}  // namespace

std::string to_json_line(const GeneratedRule& r) {
  ordered_json j;
  j["rule_id"] = r.rule_id;
  j["deer_id"] = r.deer_id;
  j["text"] = r.text;
  j["token_count"] = r.token_count;
  j["token_count_fallback"] = r.token_count_fallback;
  ordered_json scores = ordered_json::object();
  for (const auto& [id, s] : r.scores) scores[std::string(to_string(id))] = s;
  j["scores"] = scores;
  j["combined"] = r.combined ? ordered_json(*r.combined) : ordered_json(nullptr);
  j["verdict"] = r.verdict;
  j["prefiltered"] = r.prefiltered;
  j["seed"] = r.seed;
  j["variant"] = corpus::to_string(r.variant);
  return j.dump();
}

GeneratedRule parse_generated_rule(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
    GeneratedRule r;
    r.rule_id = j.at("rule_id").get<std::string>();
    r.deer_id = j.at("deer_id").get<std::string>();
    r.text = j.at("text").get<std::string>();
    r.token_count = j.at("token_count").get<std::size_t>();
    r.token_count_fallback = j.value("token_count_fallback", true);
    for (const auto& [name, value] : j.at("scores").items()) {
      auto id = parse_module_id(name);
      if (!id || !is_verifier(*id)) throw PipelineError("scores: unknown verifier " + name);
      r.scores[*id] = value.get<double>();
    }
    if (j.contains("combined") && !j["combined"].is_null()) {
      r.combined = j["combined"].get<double>();
    }
    r.verdict = j.at("verdict").get<bool>();
    r.prefiltered = j.at("prefiltered").get<bool>();
    r.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("variant")) {
      auto v = corpus::parse_fact_variant(j["variant"].get<std::string>());
      if (!v) throw PipelineError("variant: unknown value");
      r.variant = *v;
    }
    if (r.verdict && r.prefiltered) throw PipelineError("a prefiltered rule cannot be retained");
    return r;
  } catch (const json::exception& e) {
    throw PipelineError(std::string("generated rule: ") + e.what());
  }
}

std::vector<GeneratedRule> load_generated_rules(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PipelineError("cannot open " + path.string());
  std::vector<GeneratedRule> rules;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (text::trim(line).empty()) continue;
    try {
      rules.push_back(parse_generated_rule(line));
    } catch (const PipelineError& e) {
      throw PipelineError(path.string() + " line " + std::to_string(n) + ": " + e.what());
    }
  }
  return rules;
}

void save_generated_rules(const std::filesystem::path& path, std::span<const GeneratedRule> rules) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw PipelineError("cannot write " + path.string());
  for (const auto& r : rules) out << to_json_line(r) << '\n';
}

Proposals propose_rules(const backend::CompletionBackend& backend, const PromptSpec& m1,
                        const corpus::FactInput& facts, const templates::RuleTemplate& tmpl,
                        int k, std::uint64_t seed, const std::string& deer_id,
                        const ProposerConfig& config) {
  if (k < 1) throw PipelineError("k must be at least 1");
  if (m1.module_id != ModuleId::kM1) throw PipelineError("rule proposal needs the M1 prompt");

  const std::string prompt = assemble_prompt(m1, facts, std::nullopt, tmpl);
  Proposals out;
  for (int i = 0; i < k; ++i) {
    backend::CompletionRequest req;
    req.prompt = prompt;
    req.max_new_tokens = config.max_new_tokens;
    req.temperature = config.temperature;
    req.stop_sequences = config.stop_sequences;
    req.seed = seed * kRequestSeedStride + static_cast<std::uint64_t>(i);

    const std::string rule_id = deer_id + "/" + std::string(corpus::to_string(facts.variant)) +
                                "/s" + std::to_string(seed) + "/" + std::to_string(i);
    std::string completion;
    try {
      completion = backend.complete(req).text;
    } catch (const backend::BackendError& e) {
      ++out.dropped;
      out.errors.push_back(rule_id + ": " + e.what());
      continue;
    }
    GeneratedRule rule;
    rule.rule_id = rule_id;
    rule.deer_id = deer_id;
    rule.text = text::collapse_whitespace(backend::apply_stop_sequences(completion, req.stop_sequences));
    if (rule.text.empty()) {
      ++out.dropped;
      out.errors.push_back(rule_id + ": empty completion");
      continue;
    }
    const auto count = backend.count_tokens(rule.text);
    rule.token_count = count.count;
    rule.token_count_fallback = count.used_fallback;
    rule.prefiltered = rule.token_count <= config.prefilter_tokens;
    rule.seed = seed;
    rule.variant = facts.variant;
    out.rules.push_back(std::move(rule));
  }
  return out;
}

double verify(const backend::CompletionBackend& backend, const PromptSpec& spec,
              const GeneratedRule& rule, const corpus::FactInput& facts, ModuleId module) {
  if (!is_verifier(module)) throw PipelineError("verify needs one of M2..M5");
  if (spec.module_id != module) {
    throw PipelineError("prompt is for " + std::string(to_string(spec.module_id)) + ", not " +
                        std::string(to_string(module)));
  }
  if (rule.prefiltered) {
    throw PipelineError("rule " + rule.rule_id + " is prefiltered and must not be verified");
  }
  const corpus::FactInput no_facts{{}, facts.variant, facts.seed};
  const std::string prompt =
      assemble_prompt(spec, is_fact_independent(module) ? no_facts : facts, rule.text, std::nullopt);
  return backend::yes_no_score(backend, prompt).value;
}

double compose(const std::map<ModuleId, double>& scores) {
  double p = 1.0;
  for (const auto& [id, s] : scores) p *= s;
  return p;
}

bool passes(const GeneratedRule& rule, const tuning::ThresholdSet& thresholds,
            const std::set<ModuleId>& active) {
  if (rule.prefiltered) return false;
  for (ModuleId m : active) {
    auto s = rule.scores.find(m);
    if (s == rule.scores.end()) {
      throw PipelineError("rule " + rule.rule_id + " has no " + std::string(to_string(m)) +
                          " score");
    }
    auto t = thresholds.thresholds.find(m);
    if (t == thresholds.thresholds.end()) {
      throw PipelineError("no threshold for " + std::string(to_string(m)));
    }
    if (s->second < t->second) return false;
  }
  return true;
}

std::vector<GeneratedRule> filter_rules(std::span<const GeneratedRule> rules,
                                        const tuning::ThresholdSet& thresholds,
                                        const std::set<ModuleId>& active) {
  std::vector<GeneratedRule> kept;
  for (const auto& r : rules) {
    if (passes(r, thresholds, active)) {
      kept.push_back(r);
      kept.back().verdict = true;
    }
  }
  return kept;
}

void apply_verdicts(std::vector<GeneratedRule>& rules, const tuning::ThresholdSet& thresholds,
                    const std::set<ModuleId>& active) {
  for (auto& r : rules) r.verdict = passes(r, thresholds, active);
}

Colm::Colm(const backend::CompletionBackend& backend, PromptSet prompts, ProposerConfig config,
           int max_parallel)
    : backend_(backend),
      prompts_(std::move(prompts)),
      config_(std::move(config)),
      max_parallel_(max_parallel) {
  for (const auto& [id, spec] : prompts_) spec.validate();
}

Proposals Colm::propose(const corpus::FactInput& facts, const templates::RuleTemplate& tmpl,
                        int k, std::uint64_t seed, const std::string& deer_id) const {
  return propose_rules(backend_, prompt_for(prompts_, ModuleId::kM1), facts, tmpl, k, seed,
                       deer_id, config_);
}

double Colm::verify(const GeneratedRule& rule, const corpus::FactInput& facts,
                    ModuleId module) const {
  return pipeline::verify(backend_, prompt_for(prompts_, module), rule, facts, module);
}

void Colm::score(std::vector<GeneratedRule>& rules, const corpus::FactInput& facts,
                 const std::set<ModuleId>& modules) const {
  struct Job {
    std::size_t rule;
    ModuleId module;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < rules.size(); ++i) {
    if (rules[i].prefiltered) continue;
    for (ModuleId m : modules) jobs.push_back({i, m});
  }
  for (ModuleId m : modules) prompt_for(prompts_, m);

  std::vector<double> results(jobs.size());
  parallel_for(jobs.size(), max_parallel_, [&](std::size_t j) {
    const Job& job = jobs[j];
    results[j] = verify(rules[job.rule], facts, job.module);
  });
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    rules[jobs[j].rule].scores[jobs[j].module] = results[j];
  }
  for (auto& r : rules) {
    if (!r.scores.empty()) r.combined = compose(r.scores);
  }
}

}  // namespace colm::pipeline
