#include "colm/harness.hpp"

#include <cmath>
#include <functional>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "colm/mock_backend.hpp"
#include "colm/parallel.hpp"
#include "colm/random.hpp"
#include "colm/text.hpp"

namespace colm::harness {
namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 4> kGroupKeyNames = {"rule_type", "topic", "variant",
                                                            "specificity"};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw HarnessError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw HarnessError("cannot write " + path.string());
  out << content;
  if (!out) throw HarnessError("write failed for " + path.string());
}

void check_keys(const json& j, std::initializer_list<std::string_view> allowed,
                const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw HarnessError(where + ": unknown key \"" + key + "\"");
  }
}

std::string join_seeds(std::span<const std::uint64_t> seeds) {
  std::string out;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (i > 0) out += ",";
    out += std::to_string(seeds[i]);
  }
  return out;
}

std::string describe_thresholds(const tuning::ThresholdSet& t) {
  std::string out;
  char buf[32];
  for (const auto& [id, v] : t.thresholds) {
    if (!out.empty()) out += " ";
    std::snprintf(buf, sizeof buf, "%.4f", v);
    out += std::string(to_string(id)) + "=" + buf;
  }
  return out;
}

std::optional<double> mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return std::nullopt;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

std::string group_name(const RuleOutcome& o, GroupKey key) {
  switch (key) {
    case GroupKey::kRuleType: return std::string(colm::to_string(o.rule_type));
    case GroupKey::kTopic: return std::string(corpus::to_string(o.topic));
    case GroupKey::kVariant: return std::string(corpus::to_string(o.rule.variant));
    case GroupKey::kSpecificity: return std::string(corpus::to_string(o.specificity));
  }
  return {};
}

int group_rank(const RuleOutcome& o, GroupKey key) {
  switch (key) {
    case GroupKey::kRuleType: return static_cast<int>(o.rule_type);
    case GroupKey::kTopic: return static_cast<int>(o.topic);
    case GroupKey::kVariant: return static_cast<int>(o.rule.variant);
    case GroupKey::kSpecificity: return static_cast<int>(o.specificity);
  }
  return 0;
}

}  // namespace

std::string_view to_string(GroupKey key) { return kGroupKeyNames[static_cast<std::size_t>(key)]; }

std::optional<GroupKey> parse_group_key(std::string_view name) {
  for (std::size_t i = 0; i < kGroupKeyNames.size(); ++i) {
    if (kGroupKeyNames[i] == name) return static_cast<GroupKey>(i);
  }
  return std::nullopt;
}

void ExperimentConfig::validate() const {
  const auto must_exist = [](const std::filesystem::path& p, const char* what) {
    if (p.empty()) throw HarnessError(std::string(what) + " is not set");
    if (!std::filesystem::exists(p)) {
      throw HarnessError(std::string(what) + " does not exist: " + p.string());
    }
  };
  must_exist(deer_path, "deer");
  must_exist(prompt_dir, "prompts");
  if (!labels_path.empty()) must_exist(labels_path, "labels");
  if (thresholds == "tune") {
    must_exist(deerlet_path, "deerlet (needed to tune thresholds)");
  } else if (!thresholds.empty()) {
    must_exist(thresholds, "thresholds");
  }
  if (backend.kind == BackendConfig::Kind::kMock && !backend.mock_script.empty()) {
    must_exist(backend.mock_script, "backend.script");
  }
  if (backend.kind == BackendConfig::Kind::kHttp && backend.http.base_url.empty()) {
    throw HarnessError("backend.base_url is not set");
  }
  if (k < 1) throw HarnessError("k must be at least 1");
  if (seeds.empty()) throw HarnessError("seeds must not be empty");
  if (variants.empty()) throw HarnessError("variants must not be empty");
  if (max_parallel < 1) throw HarnessError("max_parallel must be at least 1");
  if (proposer.max_new_tokens < 1) throw HarnessError("proposer.max_new_tokens must be positive");
  if (proposer.temperature < 0.0) throw HarnessError("proposer.temperature must be nonnegative");
  for (ModuleId m : active_modules) {
    if (!is_verifier(m)) throw HarnessError("active_modules may only hold M2..M5");
  }
}

BackendConfig parse_backend_config(const std::string& text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw HarnessError(std::string("backend config: ") + e.what());
  }
  BackendConfig c;
  try {
    const std::string kind = j.value("kind", "mock");
    if (kind == "mock") {
      check_keys(j, {"kind", "script", "seed"}, "backend");
      c.kind = BackendConfig::Kind::kMock;
      c.mock_script = resolve(base_dir, j.value("script", ""));
      if (j.contains("seed")) c.mock_seed = j["seed"].get<std::uint64_t>();
    } else if (kind == "http") {
      check_keys(j,
                 {"kind", "base_url", "completion_path", "tokenize_path", "api_key_env_var",
                  "auth_header", "model_name", "timeout_s", "max_parallel", "retry_delays_s"},
                 "backend");
      c.kind = BackendConfig::Kind::kHttp;
      auto& h = c.http;
      h.base_url = j.at("base_url").get<std::string>();
      h.completion_path = j.value("completion_path", h.completion_path);
      h.tokenize_path = j.value("tokenize_path", h.tokenize_path);
      h.api_key_env_var = j.value("api_key_env_var", h.api_key_env_var);
      h.auth_header = j.value("auth_header", h.auth_header);
      h.model_name = j.value("model_name", h.model_name);
      h.timeout_s = j.value("timeout_s", h.timeout_s);
      h.max_parallel = j.value("max_parallel", h.max_parallel);
      h.retry_delays_s = j.value("retry_delays_s", h.retry_delays_s);
    } else {
      throw HarnessError("backend.kind must be \"mock\" or \"http\"");
    }
  } catch (const json::exception& e) {
    throw HarnessError(std::string("backend config: ") + e.what());
  }
  return c;
}

ExperimentConfig parse_experiment_config(const std::string& text,
                                         const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw HarnessError(std::string("experiment config: ") + e.what());
  }
  if (!j.is_object()) throw HarnessError("experiment config must be a JSON object");
  check_keys(j,
             {"deer", "deerlet", "labels", "prompts", "output_dir", "backend", "proposer", "k",
              "variants", "split", "active_modules", "thresholds", "seeds", "max_parallel",
              "breakdowns"},
             "config");
  ExperimentConfig c;
  try {
    c.deer_path = resolve(base_dir, j.at("deer").get<std::string>());
    c.deerlet_path = resolve(base_dir, j.value("deerlet", ""));
    c.labels_path = resolve(base_dir, j.value("labels", ""));
    c.prompt_dir = resolve(base_dir, j.value("prompts", "prompts"));
    c.output_dir = resolve(base_dir, j.value("output_dir", "out"));
    if (j.contains("backend")) c.backend = parse_backend_config(j["backend"].dump(), base_dir);
    if (j.contains("proposer")) {
      const json& p = j["proposer"];
      check_keys(p, {"temperature", "max_new_tokens", "stop", "prefilter_tokens"}, "proposer");
      c.proposer.temperature = p.value("temperature", c.proposer.temperature);
      c.proposer.max_new_tokens = p.value("max_new_tokens", c.proposer.max_new_tokens);
      c.proposer.stop_sequences = p.value("stop", c.proposer.stop_sequences);
      c.proposer.prefilter_tokens = p.value("prefilter_tokens", c.proposer.prefilter_tokens);
    }
    c.k = j.value("k", c.k);
    if (j.contains("variants")) {
      c.variants.clear();
      for (const auto& v : j["variants"]) {
        auto parsed = corpus::parse_fact_variant(v.get<std::string>());
        if (!parsed) throw HarnessError("variants: unknown value " + v.dump());
        c.variants.push_back(*parsed);
      }
    }
    if (j.contains("split")) {
      const std::string s = j["split"].get<std::string>();
      if (s == "all") {
        c.split.reset();
      } else {
        c.split = corpus::parse_deer_split(s);
        if (!c.split) throw HarnessError("split must be train, test or all");
      }
    }
    if (j.contains("active_modules")) {
      c.active_modules.clear();
      for (const auto& m : j["active_modules"]) {
        auto id = parse_module_id(m.get<std::string>());
        if (!id || !is_verifier(*id)) throw HarnessError("active_modules: bad module " + m.dump());
        c.active_modules.insert(*id);
      }
    }
    if (j.contains("thresholds")) {
      const std::string t = j["thresholds"].get<std::string>();
      c.thresholds = (t == "tune" || t.empty()) ? t : resolve(base_dir, t).string();
    }
    if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    c.max_parallel = j.value("max_parallel", c.max_parallel);
    if (j.contains("breakdowns")) {
      c.breakdowns.clear();
      for (const auto& b : j["breakdowns"]) {
        auto key = parse_group_key(b.get<std::string>());
        if (!key) throw HarnessError("breakdowns: unknown key " + b.dump());
        c.breakdowns.push_back(*key);
      }
    }
  } catch (const json::exception& e) {
    throw HarnessError(std::string("experiment config: ") + e.what());
  }
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return parse_experiment_config(read_file(path), path.parent_path());
}

std::unique_ptr<backend::CompletionBackend> make_backend(const BackendConfig& config) {
  if (config.kind == BackendConfig::Kind::kHttp) {
    return std::make_unique<backend::HttpBackend>(config.http);
  }
  if (config.mock_script.empty()) {
    return std::make_unique<backend::MockBackend>(std::vector<backend::ScriptEntry>{},
                                                  config.mock_seed.value_or(0));
  }
  return std::make_unique<backend::MockBackend>(
      backend::MockBackend::from_file(config.mock_script, config.mock_seed));
}

MetricRow metric_row(std::string label, std::span<const RuleOutcome> outcomes) {
  MetricRow row;
  row.label = std::move(label);
  std::vector<metrics::ScoredRule> pool;
  double meteor_sum = 0.0;
  for (const auto& o : outcomes) {
    if (o.rule.prefiltered) {
      ++row.prefiltered;
      continue;
    }
    ++row.rules;
    pool.push_back({o.rule.rule_id, o.meteor, o.rule.verdict});
    if (o.rule.verdict) {
      ++row.retained;
      meteor_sum += o.meteor;
    }
  }
  if (row.retained > 0) row.meteor = 100.0 * meteor_sum / static_cast<double>(row.retained);
  if (pool.size() >= 10) row.wrecall = metrics::wrecall(pool).value;
  if (row.meteor && row.wrecall) row.green = metrics::green(*row.meteor, *row.wrecall);
  return row;
}

std::pair<std::vector<MetricRow>, MetricRow> seed_rows(std::span<const RuleOutcome> outcomes,
                                                       std::span<const std::uint64_t> seeds) {
  std::vector<MetricRow> rows;
  MetricRow mean;
  mean.label = "mean";
  std::vector<double> meteors, wrecalls;
  for (std::uint64_t seed : seeds) {
    std::vector<RuleOutcome> subset;
    for (const auto& o : outcomes) {
      if (o.rule.seed == seed) subset.push_back(o);
    }
    MetricRow row = metric_row("seed " + std::to_string(seed), subset);
    mean.rules += row.rules;
    mean.prefiltered += row.prefiltered;
    mean.retained += row.retained;
    if (row.meteor) meteors.push_back(*row.meteor);
    if (row.wrecall) wrecalls.push_back(*row.wrecall);
    rows.push_back(std::move(row));
  }
  mean.meteor = mean_of(meteors);
  mean.wrecall = mean_of(wrecalls);
  if (mean.meteor && mean.wrecall) mean.green = metrics::green(*mean.meteor, *mean.wrecall);
  return {std::move(rows), std::move(mean)};
}

std::vector<GroupRow> breakdown(std::span<const RuleOutcome> outcomes, GroupKey key,
                                std::span<const std::uint64_t> seeds) {
  std::map<int, std::vector<RuleOutcome>> groups;
  for (const auto& o : outcomes) groups[group_rank(o, key)].push_back(o);
  std::vector<GroupRow> rows;
  for (const auto& [rank, members] : groups) {
    GroupRow g;
    g.group = group_name(members.front(), key);
    std::set<std::string> records;
    for (const auto& o : members) records.insert(o.rule.deer_id);
    g.records = records.size();
    g.candidates = members.size();
    g.mean = seed_rows(members, seeds).second;
    g.mean.label = g.group;
    rows.push_back(std::move(g));
  }
  return rows;
}

const char* correctness_rule_description() {
  return "correct when every label is positive after binarization (3-point: 1 or 2; 2-point: 1)";
}

HumanEval human_eval(std::span<const pipeline::GeneratedRule> rules,
                     const std::map<std::string, metrics::HumanLabels>& labels) {
  HumanEval h;
  std::vector<std::string> missing;
  std::size_t true_positive = 0;
  double sums[4] = {0, 0, 0, 0};
  for (const auto& r : rules) {
    if (r.prefiltered) continue;
    auto it = labels.find(r.rule_id);
    if (r.verdict) ++h.retained;
    if (it == labels.end()) {
      if (r.verdict) missing.push_back(r.rule_id);
      continue;
    }
    const metrics::HumanLabels& l = it->second;
    ++h.labeled;
    const bool correct = tuning::binarize_gold(l.consistent, tuning::LabelScale::kThreePoint) &&
                         tuning::binarize_gold(l.reality, tuning::LabelScale::kThreePoint) &&
                         tuning::binarize_gold(l.general, tuning::LabelScale::kThreePoint) &&
                         tuning::binarize_gold(l.nontrivial, tuning::LabelScale::kTwoPoint);
    if (correct) ++h.correct;
    if (r.verdict) {
      if (correct) ++true_positive;
      sums[0] += metrics::normalize_three_point(l.consistent);
      sums[1] += metrics::normalize_three_point(l.reality);
      sums[2] += metrics::normalize_three_point(l.general);
      sums[3] += metrics::normalize_two_point(l.nontrivial);
    }
  }
  if (!missing.empty()) {
    std::string msg = "retained rules without labels:";
    for (const auto& id : missing) msg += " " + id;
    throw HarnessError(msg);
  }
  if (h.retained == 0) {
    h.precision_undefined = true;
  } else {
    const double n = static_cast<double>(h.retained);
    h.precision = static_cast<double>(true_positive) / n;
    h.consistent = sums[0] / n;
    h.reality = sums[1] / n;
    h.general = sums[2] / n;
    h.nontrivial = sums[3] / n;
  }
  if (h.correct == 0) {
    h.recall_undefined = true;
  } else {
    h.recall = static_cast<double>(true_positive) / static_cast<double>(h.correct);
  }
  if (h.precision + h.recall > 0.0) h.f1 = 2.0 * h.precision * h.recall / (h.precision + h.recall);
  return h;
}

metrics::CorrelationResult correlate(std::span<const double> metric_scores,
                                     std::span<const double> human_scores) {
  if (metric_scores.size() != human_scores.size()) {
    throw HarnessError("correlate: " + std::to_string(metric_scores.size()) + " metric scores vs " +
                       std::to_string(human_scores.size()) + " human scores");
  }
  return metrics::pearson(metric_scores, human_scores);
}

MetricHumanCorrelation correlate_deerlet(std::span<const corpus::DeerRecord> deer,
                                         std::span<const corpus::DeerletRecord> deerlet) {
  std::map<std::string, const corpus::DeerRecord*> by_id;
  for (const auto& r : deer) by_id[r.id] = &r;
  std::vector<double> meteors, bleus, human;
  for (const auto& r : deerlet) {
    auto it = by_id.find(r.deer_id);
    if (it == by_id.end()) throw HarnessError("DEERLET " + r.id + " cites unknown " + r.deer_id);
    meteors.push_back(metrics::meteor(r.rule_text, it->second->rule_text));
    bleus.push_back(metrics::bleu(r.rule_text, {it->second->rule_text}));
    human.push_back(metrics::aggregate_human(r.labels));
  }
  MetricHumanCorrelation out;
  out.pairs = human.size();
  out.meteor = correlate(meteors, human);
  out.bleu = correlate(bleus, human);
  return out;
}

int aspect_label(const metrics::HumanLabels& labels, ModuleId module) {
  switch (module) {
    case ModuleId::kM2: return labels.consistent;
    case ModuleId::kM3: return labels.reality;
    case ModuleId::kM4: return labels.general;
    case ModuleId::kM5: return labels.nontrivial;
    case ModuleId::kM1: break;
  }
  throw HarnessError("M1 has no aspect label");
}

tuning::ThresholdSet tune_thresholds(const pipeline::Colm& colm,
                                     std::span<const corpus::DeerletRecord> deerlet,
                                     const std::set<ModuleId>& modules,
                                     const tuning::TuningPolicy& policy,
                                     corpus::DeerletSplit split) {
  std::vector<const corpus::DeerletRecord*> records;
  for (const auto& r : deerlet) {
    if (r.split == split) records.push_back(&r);
  }
  const std::vector<ModuleId> mods(modules.begin(), modules.end());
  std::vector<double> scores(records.size() * mods.size());
  parallel_for(scores.size(), colm.max_parallel(), [&](std::size_t j) {
    const corpus::DeerletRecord& r = *records[j / mods.size()];
    pipeline::GeneratedRule rule;
    rule.rule_id = r.id;
    rule.deer_id = r.deer_id;
    rule.text = r.rule_text;
    const corpus::FactInput facts{r.facts, corpus::FactVariant::kShort3, 0};
    scores[j] = colm.verify(rule, facts, mods[j % mods.size()]);
  });

  tuning::ThresholdSet set;
  for (std::size_t m = 0; m < mods.size(); ++m) {
    const ModuleId id = mods[m];
    const auto scale =
        id == ModuleId::kM5 ? tuning::LabelScale::kTwoPoint : tuning::LabelScale::kThreePoint;
    std::vector<double> s;
    std::vector<bool> g;
    for (std::size_t i = 0; i < records.size(); ++i) {
      s.push_back(scores[i * mods.size() + m]);
      g.push_back(tuning::binarize_gold(aspect_label(records[i]->labels, id), scale));
    }
    try {
      const auto result = tuning::tune_threshold(s, g, policy);
      set.thresholds[id] = result.threshold;
      set.diagnostics[id] = result;
    } catch (const tuning::TuningError& e) {
      set.thresholds[id] = 0.5;
      set.fallbacks[id] = e.what();
    }
  }
  return set;
}

std::uint64_t fact_variant_seed(const std::string& deer_id, std::uint64_t seed) {
  return stable_hash(deer_id, seed);
}

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const backend::CompletionBackend& backend) {
  config.validate();
  std::vector<corpus::DeerRecord> records;
  for (auto& r : corpus::load_deer(config.deer_path)) {
    if (!config.split || r.split == *config.split) records.push_back(std::move(r));
  }
  if (records.empty()) throw HarnessError("no DEER records in the selected split");
  const pipeline::PromptSet prompts = pipeline::load_prompt_dir(config.prompt_dir);

  ExperimentResult result;
  if (config.active_modules.empty() || config.thresholds.empty()) {
    result.thresholds = tuning::ThresholdSet::uniform(0.5);
  } else if (config.thresholds == "tune") {
    const pipeline::Colm tuner(backend, prompts, config.proposer, config.max_parallel);
    const auto deerlet = corpus::load_deerlet(config.deerlet_path);
    result.thresholds = tune_thresholds(tuner, deerlet, config.active_modules);
    for (ModuleId m : kVerifierModules) {
      result.thresholds.thresholds.try_emplace(m, 0.5);
    }
  } else {
    result.thresholds = tuning::ThresholdSet::load(config.thresholds);
  }
  result.thresholds.validate();

  // Record-level work runs in parallel; each job issues its backend calls
  // one at a time so in-flight requests stay within max_parallel.
  const pipeline::Colm colm(backend, prompts, config.proposer, 1);
  struct Job {
    const corpus::DeerRecord* record;
    corpus::FactVariant variant;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (auto variant : config.variants) {
    for (auto seed : config.seeds) {
      for (const auto& r : records) jobs.push_back({&r, variant, seed});
    }
  }
  std::vector<pipeline::Proposals> done(jobs.size());
  std::vector<std::vector<double>> meteors(jobs.size());
  parallel_for(jobs.size(), config.max_parallel, [&](std::size_t j) {
    const Job& job = jobs[j];
    const auto facts =
        corpus::make_fact_variant(*job.record, job.variant, fact_variant_seed(job.record->id, job.seed));
    auto proposals = colm.propose(facts, templates::template_for(job.record->rule_type), config.k,
                                  job.seed, job.record->id);
    colm.score(proposals.rules, facts, config.active_modules);
    pipeline::apply_verdicts(proposals.rules, result.thresholds, config.active_modules);
    for (const auto& rule : proposals.rules) {
      meteors[j].push_back(metrics::meteor(rule.text, job.record->rule_text));
    }
    done[j] = std::move(proposals);
  });

  MetricReport& report = result.report;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    report.dropped += done[j].dropped;
    report.errors.insert(report.errors.end(), done[j].errors.begin(), done[j].errors.end());
    for (std::size_t i = 0; i < done[j].rules.size(); ++i) {
      RuleOutcome o;
      o.rule = std::move(done[j].rules[i]);
      o.meteor = meteors[j][i];
      o.rule_type = jobs[j].record->rule_type;
      o.topic = jobs[j].record->topic;
      o.specificity = jobs[j].record->fact_specificity;
      result.outcomes.push_back(std::move(o));
    }
  }

  std::string variants, modules;
  for (auto v : config.variants) variants += (variants.empty() ? "" : ",") + std::string(corpus::to_string(v));
  for (auto m : config.active_modules) modules += (modules.empty() ? "" : ",") + std::string(to_string(m));
  report.metadata = {
      {"backend", config.backend.kind == BackendConfig::Kind::kMock ? "mock" : "http"},
      {"records", std::to_string(records.size())},
      {"split", config.split ? std::string(corpus::to_string(*config.split)) : "all"},
      {"variants", variants},
      {"seeds", join_seeds(config.seeds)},
      {"k", std::to_string(config.k)},
      {"active_modules", modules.empty() ? "none" : modules},
      {"thresholds", config.active_modules.empty() ? "unused" : describe_thresholds(result.thresholds)},
      {"prefilter_tokens", std::to_string(config.proposer.prefilter_tokens)},
      {"correctness_rule", correctness_rule_description()},
  };
  auto [runs, mean] = seed_rows(result.outcomes, config.seeds);
  report.runs = std::move(runs);
  report.mean = std::move(mean);
  for (GroupKey key : config.breakdowns) {
    report.breakdowns[std::string(to_string(key))] =
        breakdown(result.outcomes, key, config.seeds);
  }
  if (!config.labels_path.empty()) {
    std::map<std::string, metrics::HumanLabels> labels;
    for (const auto& r : corpus::load_deerlet(config.labels_path)) labels[r.id] = r.labels;
    std::vector<pipeline::GeneratedRule> rules;
    for (const auto& o : result.outcomes) rules.push_back(o.rule);
    report.human = human_eval(rules, labels);
  }
  return result;
}

ExperimentResult run_and_write(const ExperimentConfig& config) {
  config.validate();
  const auto backend = make_backend(config.backend);
  ExperimentResult result = run_experiment(config, *backend);
  std::filesystem::create_directories(config.output_dir);
  std::vector<pipeline::GeneratedRule> rules;
  for (const auto& o : result.outcomes) rules.push_back(o.rule);
  pipeline::save_generated_rules(config.output_dir / "rules.jsonl", rules);
  result.thresholds.save((config.output_dir / "thresholds.json").string());
  write_file(config.output_dir / "report.json", to_json(result.report));
  write_file(config.output_dir / "report.txt", render_table(result.report));
  return result;
}

std::string_view aspect_name(ModuleId module) {
  switch (module) {
    case ModuleId::kM2: return "consistent";
    case ModuleId::kM3: return "reality";
    case ModuleId::kM4: return "general";
    case ModuleId::kM5: return "nontrivial";
    case ModuleId::kM1: break;
  }
  return "none";
}

namespace {

tuning::LabelScale scale_of(ModuleId m) {
  return m == ModuleId::kM5 ? tuning::LabelScale::kTwoPoint : tuning::LabelScale::kThreePoint;
}

std::vector<AspectClassification> classify_aspects(
    std::span<const corpus::DeerletRecord> deerlet,
    const std::function<double(const corpus::DeerletRecord&)>& score,
    const std::optional<tuning::TuningPolicy>& policy) {
  std::vector<AspectClassification> out;
  for (ModuleId m : kVerifierModules) {
    AspectClassification a;
    a.module = m;
    a.aspect = std::string(aspect_name(m));
    if (policy) {
      std::vector<double> s;
      std::vector<bool> g;
      for (const auto& r : deerlet) {
        if (r.split != corpus::DeerletSplit::kVal) continue;
        s.push_back(score(r));
        g.push_back(tuning::binarize_gold(aspect_label(r.labels, m), scale_of(m)));
      }
      try {
        a.threshold = tuning::tune_threshold(s, g, *policy).threshold;
      } catch (const tuning::TuningError& e) {
        a.threshold = 0.5;
        a.threshold_fallback = e.what();
      }
    }
    std::vector<double> s;
    std::vector<bool> g;
    for (const auto& r : deerlet) {
      if (r.split != corpus::DeerletSplit::kTest) continue;
      s.push_back(score(r));
      g.push_back(tuning::binarize_gold(aspect_label(r.labels, m), scale_of(m)));
    }
    if (s.empty()) throw HarnessError("DEERLET has no test records");
    a.n = s.size();
    a.positive_rate = static_cast<double>(std::count(g.begin(), g.end(), true)) /
                      static_cast<double>(g.size());
    a.metrics = metrics::classification_metrics(s, g, a.threshold);
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace

std::vector<AspectClassification> tfidf_baseline(std::span<const corpus::DeerletRecord> deerlet,
                                                 const tuning::TuningPolicy& policy) {
  std::vector<corpus::DeerletRecord> train;
  for (const auto& r : deerlet) {
    if (r.split == corpus::DeerletSplit::kTrain) train.push_back(r);
  }
  const auto docs = baselines::tfidf_training_corpus(train);
  const auto model = baselines::tfidf_fit(docs);
  return classify_aspects(
      deerlet,
      [&](const corpus::DeerletRecord& r) {
        return baselines::tfidf_score(text::join(r.facts, " "), r.rule_text, model);
      },
      policy);
}

std::vector<AspectClassification> majority_baseline(
    std::span<const corpus::DeerletRecord> deerlet) {
  // Every prediction is "yes": a constant score at the threshold.
  return classify_aspects(deerlet, [](const corpus::DeerletRecord&) { return 1.0; }, std::nullopt);
}

std::vector<RuleOutcome> rf_baseline(std::span<const corpus::DeerRecord> deer,
                                     std::span<const corpus::FactVariant> variants,
                                     std::span<const std::uint64_t> seeds, int k) {
  std::vector<RuleOutcome> out;
  for (auto variant : variants) {
    for (auto seed : seeds) {
      for (const auto& rec : deer) {
        const auto facts =
            corpus::make_fact_variant(rec, variant, fact_variant_seed(rec.id, seed));
        const auto tmpl = templates::template_for(rec.rule_type);
        for (int i = 0; i < k; ++i) {
          RuleOutcome o;
          o.rule.rule_id = rec.id + "/" + std::string(corpus::to_string(variant)) + "/s" +
                           std::to_string(seed) + "/rf" + std::to_string(i);
          o.rule.deer_id = rec.id;
          o.rule.text = baselines::rf_generate(
              facts, tmpl,
              stable_hash(rec.id, seed * pipeline::kRequestSeedStride + static_cast<std::uint64_t>(i)));
          o.rule.token_count = metrics::tokenize(o.rule.text).size();
          o.rule.verdict = true;
          o.rule.seed = seed;
          o.rule.variant = variant;
          o.meteor = metrics::meteor(o.rule.text, rec.rule_text);
          o.rule_type = rec.rule_type;
          o.topic = rec.topic;
          o.specificity = rec.fact_specificity;
          out.push_back(std::move(o));
        }
      }
    }
  }
  return out;
}

}  // namespace colm::harness
