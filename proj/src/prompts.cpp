#include "colm/prompts.hpp"

#include <fstream>
#include <sstream>

#include "colm/text.hpp"

namespace colm::pipeline {
namespace {

std::string render_query(const std::string& layout, const std::vector<std::string>& facts,
                         const std::string& tmpl, const std::string& rule) {
  // Substitute placeholders in one pass so inserted text is never rescanned.
  std::string out;
  for (std::size_t i = 0; i < layout.size();) {
    auto starts = [&](std::string_view p) { return layout.compare(i, p.size(), p) == 0; };
    if (starts(kFactsSlot)) {
      out += render_facts(facts);
      i += kFactsSlot.size();
    } else if (starts(kTemplateSlot)) {
      out += tmpl;
      i += kTemplateSlot.size();
    } else if (starts(kRuleSlot)) {
      out += rule;
      i += kRuleSlot.size();
    } else {
      out.push_back(layout[i++]);
    }
  }
  return out;
}

std::string strip_trailing_newlines(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r' || s.back() == ' ')) s.pop_back();
  return s;
}

}  // namespace

bool PromptSpec::has_slot(std::string_view placeholder) const {
  return query_layout.find(placeholder) != std::string::npos;
}

void PromptSpec::validate() const {
  const std::string name(to_string(module_id));
  const auto need = [&](std::string_view slot) {
    if (!has_slot(slot)) throw PipelineError(name + " prompt query lacks " + std::string(slot));
  };
  switch (module_id) {
    case ModuleId::kM1:
      need(kFactsSlot);
      need(kTemplateSlot);
      break;
    case ModuleId::kM2:
    case ModuleId::kM4:
      need(kFactsSlot);
      need(kRuleSlot);
      break;
    case ModuleId::kM3:
    case ModuleId::kM5:
      need(kRuleSlot);
      if (has_slot(kFactsSlot)) throw PipelineError(name + " prompt must not include facts");
      break;
  }
  for (const auto& ex : few_shot_examples) {
    if (module_id == ModuleId::kM1 && ex.rule.empty()) {
      throw PipelineError(name + " demonstration without a rule");
    }
    if (module_id != ModuleId::kM1 && ex.answer.empty()) {
      throw PipelineError(name + " demonstration without an answer");
    }
  }
}

PromptSpec parse_prompt_spec(std::string_view text) {
  PromptSpec spec;
  std::optional<ModuleId> module;
  std::string section;
  std::string body;
  bool have_instruction = false;
  bool have_query = false;

  const auto flush = [&] {
    if (section.empty()) return;
    if (section == "module") {
      module = parse_module_id(text::trim(body));
      if (!module) throw PipelineError("unknown module \"" + text::trim(body) + "\"");
    } else if (section == "instruction") {
      spec.instruction_text = text::trim(body);
      have_instruction = true;
    } else if (section == "query") {
      spec.query_layout = strip_trailing_newlines(body);
      while (!spec.query_layout.empty() && spec.query_layout.front() == '\n') {
        spec.query_layout.erase(0, 1);
      }
      have_query = true;
    } else if (section == "example") {
      FewShotExample ex;
      std::istringstream lines(body);
      std::string line;
      while (std::getline(lines, line)) {
        if (text::trim(line).empty()) continue;
        const auto colon = line.find(':');
        if (colon == std::string::npos) throw PipelineError("example line without a key: " + line);
        const std::string key = text::trim(line.substr(0, colon));
        const std::string value = text::trim(line.substr(colon + 1));
        if (key == "fact") ex.facts.push_back(value);
        else if (key == "template") ex.rule_template = value;
        else if (key == "rule") ex.rule = value;
        else if (key == "answer") ex.answer = value;
        else throw PipelineError("unknown example key \"" + key + "\"");
      }
      spec.few_shot_examples.push_back(std::move(ex));
    } else {
      throw PipelineError("unknown prompt section \"" + section + "\"");
    }
  };

  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("### ", 0) == 0) {
      flush();
      section = text::trim(line.substr(4));
      body.clear();
      continue;
    }
    body += line;
    body.push_back('\n');
  }
  flush();

  if (!module) throw PipelineError("prompt file lacks a module section");
  if (!have_instruction) throw PipelineError("prompt file lacks an instruction section");
  if (!have_query) throw PipelineError("prompt file lacks a query section");
  spec.module_id = *module;
  spec.validate();
  return spec;
}

PromptSpec load_prompt_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PipelineError("cannot open prompt file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_prompt_spec(buf.str());
  } catch (const PipelineError& e) {
    throw PipelineError(path.string() + ": " + e.what());
  }
}

PromptSet load_prompt_dir(const std::filesystem::path& dir) {
  PromptSet set;
  for (auto id : {ModuleId::kM1, ModuleId::kM2, ModuleId::kM3, ModuleId::kM4, ModuleId::kM5}) {
    const auto path = dir / (text::ascii_lower(to_string(id)) + ".txt");
    PromptSpec spec = load_prompt_spec(path);
    if (spec.module_id != id) {
      throw PipelineError(path.string() + " declares module " + std::string(to_string(spec.module_id)));
    }
    set.emplace(id, std::move(spec));
  }
  return set;
}

std::string render_facts(const std::vector<std::string>& facts) {
  std::string out;
  for (std::size_t i = 0; i < facts.size(); ++i) {
    if (i > 0) out.push_back('\n');
    out += std::to_string(i + 1) + ". " + text::collapse_whitespace(facts[i]);
  }
  return out;
}

std::string assemble_prompt(const PromptSpec& spec, const corpus::FactInput& facts,
                            const std::optional<std::string>& rule,
                            const std::optional<templates::RuleTemplate>& tmpl) {
  const std::string name(to_string(spec.module_id));
  if (spec.has_slot(kFactsSlot) && facts.texts.empty()) {
    throw PipelineError(name + " prompt needs facts");
  }
  if (spec.has_slot(kRuleSlot) && !rule) throw PipelineError(name + " prompt needs a rule");
  if (spec.has_slot(kTemplateSlot) && !tmpl) {
    throw PipelineError(name + " prompt needs a rule template");
  }

  std::string out = spec.instruction_text;
  const std::size_t shots = std::min(spec.few_shot_examples.size(),
                                     spec.few_shot_count.value_or(spec.few_shot_examples.size()));
  for (std::size_t i = 0; i < shots; ++i) {
    const auto& ex = spec.few_shot_examples[i];
    out += "\n\n";
    out += render_query(spec.query_layout, ex.facts, ex.rule_template, ex.rule);
    out += ' ';
    out += spec.module_id == ModuleId::kM1 ? ex.rule : ex.answer;
  }
  out += "\n\n";
  out += render_query(spec.query_layout, facts.texts, tmpl ? tmpl->surface : std::string{},
                      rule ? text::collapse_whitespace(*rule) : std::string{});
  return out;
}

}  // namespace colm::pipeline
