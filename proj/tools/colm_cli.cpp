// Command-line front end for the rule-induction toolkit.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#ifdef COLM_WITH_ANNOTATION
#include "colm/annotation_server.hpp"
#endif
#include "colm/baselines.hpp"
#include "colm/harness.hpp"
#include "colm/mock_backend.hpp"

namespace {

using namespace colm;

struct Common {
  std::string backend_config;
  std::string prompts = "prompts";
  int max_parallel = 4;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::unique_ptr<backend::CompletionBackend> backend_from(const Common& c) {
  if (c.backend_config.empty()) return std::make_unique<backend::MockBackend>();
  const std::filesystem::path path(c.backend_config);
  return harness::make_backend(harness::parse_backend_config(read_file(path), path.parent_path()));
}

std::set<ModuleId> parse_modules(const std::vector<std::string>& names) {
  std::set<ModuleId> out;
  for (const auto& n : names) {
    auto id = parse_module_id(n);
    if (!id || !is_verifier(*id)) throw Error("not a verifier module: " + n);
    out.insert(*id);
  }
  return out;
}

std::vector<corpus::DeerRecord> select_split(std::vector<corpus::DeerRecord> records,
                                             const std::string& split) {
  if (split == "all") return records;
  auto s = corpus::parse_deer_split(split);
  if (!s) throw Error("split must be train, test or all");
  std::vector<corpus::DeerRecord> out;
  for (auto& r : records) {
    if (r.split == *s) out.push_back(std::move(r));
  }
  return out;
}

corpus::FactVariant parse_variant(const std::string& name) {
  auto v = corpus::parse_fact_variant(name);
  if (!v) throw Error("unknown fact variant: " + name);
  return *v;
}

void print_aspects(const std::vector<harness::AspectClassification>& rows) {
  std::printf("%-11s %9s %9s %9s %9s %9s\n", "aspect", "threshold", "accuracy", "f1", "AP",
              "pos.rate");
  for (const auto& a : rows) {
    std::printf("%-11s %9.2f %9.3f %9.3f %9.3f %9.3f%s\n", a.aspect.c_str(), a.threshold,
                a.metrics.accuracy, a.metrics.f1, a.metrics.average_precision, a.positive_rate,
                a.threshold_fallback.empty() ? "" : "  (threshold fallback)");
  }
}

#ifdef COLM_WITH_ANNOTATION
harness::AnnotationServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}
#endif

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rule induction with a proposer and verifier chain over a completion backend"};
  app.require_subcommand(1);
  Common common;
  const auto add_backend = [&](CLI::App* sub) {
    sub->add_option("--backend", common.backend_config,
                    "Backend config JSON (default: unscripted mock)");
    sub->add_option("--prompts", common.prompts, "Directory with m1.txt .. m5.txt");
    sub->add_option("--max-parallel", common.max_parallel, "Concurrent backend requests")
        ->check(CLI::PositiveNumber);
  };

  // propose
  auto* propose = app.add_subcommand("propose", "Generate candidate rules for DEER records");
  add_backend(propose);
  std::string deer_path, out_path, split = "test", variant_name = "short3";
  int k = 10;
  std::uint64_t seed = 0;
  pipeline::ProposerConfig proposer;
  propose->add_option("--deer", deer_path, "DEER JSONL")->required()->check(CLI::ExistingFile);
  propose->add_option("--out", out_path, "Output rules JSONL")->required();
  propose->add_option("-k", k, "Candidates per record")->check(CLI::PositiveNumber);
  propose->add_option("--seed", seed, "Run seed");
  propose->add_option("--split", split, "train, test or all");
  propose->add_option("--variant", variant_name, "long1, short1, short2, short3, short3_missing");
  propose->add_option("--temperature", proposer.temperature);
  propose->add_option("--max-new-tokens", proposer.max_new_tokens);
  propose->add_option("--prefilter-tokens", proposer.prefilter_tokens,
                      "Rules with at most this many tokens skip verification");

  // verify
  auto* verify = app.add_subcommand("verify", "Score rules with verifier modules");
  add_backend(verify);
  std::string rules_path;
  std::vector<std::string> module_names = {"M2", "M3", "M4", "M5"};
  verify->add_option("--deer", deer_path, "DEER JSONL")->required()->check(CLI::ExistingFile);
  verify->add_option("--rules", rules_path, "Rules JSONL")->required()->check(CLI::ExistingFile);
  verify->add_option("--out", out_path, "Output rules JSONL")->required();
  verify->add_option("--modules", module_names, "Verifiers to run")->delimiter(',');

  // filter
  auto* filter = app.add_subcommand("filter", "Apply per-module thresholds");
  std::string thresholds_path;
  filter->add_option("--rules", rules_path, "Scored rules JSONL")->required()->check(CLI::ExistingFile);
  filter->add_option("--thresholds", thresholds_path, "Thresholds JSON (default 0.5 each)")
      ->check(CLI::ExistingFile);
  filter->add_option("--modules", module_names, "Active verifiers")->delimiter(',');
  filter->add_option("--out", out_path, "Output rules JSONL with verdicts")->required();

  // tune
  auto* tune = app.add_subcommand("tune", "Tune verifier thresholds on DEERLET validation data");
  add_backend(tune);
  std::string deerlet_path, objective = "f1";
  double step = 0.01;
  tune->add_option("--deerlet", deerlet_path, "DEERLET JSONL")->required()->check(CLI::ExistingFile);
  tune->add_option("--modules", module_names, "Verifiers to tune")->delimiter(',');
  tune->add_option("--objective", objective, "f1 or accuracy")
      ->check(CLI::IsMember({"f1", "accuracy"}));
  tune->add_option("--step", step, "Grid step");
  tune->add_option("--out", out_path, "Thresholds JSON")->required();

  // eval / analyze
  auto* eval = app.add_subcommand("eval", "Run an experiment and write its report");
  std::string config_path, output_dir;
  eval->add_option("--config", config_path, "Experiment JSON")->required()->check(CLI::ExistingFile);
  eval->add_option("--output-dir", output_dir, "Override the configured output directory");
  std::vector<std::uint64_t> seeds;
  eval->add_option("--seeds", seeds, "Override the configured seeds")->delimiter(',');

  auto* analyze = app.add_subcommand("analyze", "Run an experiment and print breakdown tables");
  std::vector<std::string> by = {"rule_type", "topic", "variant", "specificity"};
  analyze->add_option("--config", config_path, "Experiment JSON")->required()->check(CLI::ExistingFile);
  analyze->add_option("--by", by, "rule_type, topic, variant, specificity")->delimiter(',');

  // baseline
  auto* baseline = app.add_subcommand("baseline", "Run a baseline");
  std::string kind;
  std::vector<std::string> variant_names = {"short3"};
  baseline->add_option("--kind", kind, "rf, tfidf or majority")
      ->required()
      ->check(CLI::IsMember({"rf", "tfidf", "majority"}));
  baseline->add_option("--deer", deer_path, "DEER JSONL (rf)")->check(CLI::ExistingFile);
  baseline->add_option("--deerlet", deerlet_path, "DEERLET JSONL (tfidf, majority)")
      ->check(CLI::ExistingFile);
  baseline->add_option("--split", split, "DEER split for rf");
  baseline->add_option("--variants", variant_names, "Fact variants for rf")->delimiter(',');
  baseline->add_option("--seeds", seeds, "Seeds for rf (default 0..4)")->delimiter(',');
  baseline->add_option("--out", out_path, "Write rf rules JSONL here");

  // correlate
  auto* correlate = app.add_subcommand("correlate", "Correlate METEOR and BLEU with DEERLET labels");
  correlate->add_option("--deer", deer_path, "DEER JSONL")->required()->check(CLI::ExistingFile);
  correlate->add_option("--deerlet", deerlet_path, "DEERLET JSONL")->required()->check(CLI::ExistingFile);

#ifdef COLM_WITH_ANNOTATION
  // serve
  auto* serve = app.add_subcommand("serve", "Serve the annotation API and UI");
  harness::AnnotationConfig annotation;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string candidates, output, static_dir;
  serve->add_option("--deer", deer_path, "DEER JSONL")->required()->check(CLI::ExistingFile);
  serve->add_option("--candidates", candidates, "Generated rules JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  serve->add_option("--output", output, "Labeled DEERLET JSONL (appended)")->required();
  serve->add_option("--static", static_dir, "UI bundle directory")->check(CLI::ExistingDirectory);
  serve->add_option("--host", host);
  serve->add_option("--port", port)->check(CLI::Range(0, 65535));

#endif

  // report
  auto* report = app.add_subcommand("report", "Print a saved report as tables");
  std::string report_path;
  report->add_option("--report", report_path, "report.json")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (propose->parsed()) {
      const auto backend = backend_from(common);
      pipeline::Colm colm(*backend, pipeline::load_prompt_dir(common.prompts), proposer,
                          common.max_parallel);
      const auto variant = parse_variant(variant_name);
      std::vector<pipeline::GeneratedRule> all;
      std::size_t dropped = 0;
      for (const auto& rec : select_split(corpus::load_deer(deer_path), split)) {
        const auto facts =
            corpus::make_fact_variant(rec, variant, harness::fact_variant_seed(rec.id, seed));
        auto p = colm.propose(facts, templates::template_for(rec.rule_type), k, seed, rec.id);
        dropped += p.dropped;
        for (const auto& e : p.errors) std::cerr << "dropped " << e << "\n";
        all.insert(all.end(), p.rules.begin(), p.rules.end());
      }
      pipeline::save_generated_rules(out_path, all);
      std::size_t prefiltered = 0;
      for (const auto& r : all) prefiltered += r.prefiltered;
      std::printf("%zu candidates, %zu prefiltered, %zu dropped\n", all.size(), prefiltered,
                  dropped);
    } else if (verify->parsed()) {
      const auto backend = backend_from(common);
      pipeline::Colm colm(*backend, pipeline::load_prompt_dir(common.prompts), {},
                          common.max_parallel);
      const auto modules = parse_modules(module_names);
      std::map<std::string, corpus::DeerRecord> deer;
      for (auto& r : corpus::load_deer(deer_path)) deer.emplace(r.id, std::move(r));
      auto rules = pipeline::load_generated_rules(rules_path);
      // Rules sharing a record, variant and seed share their facts.
      std::map<std::tuple<std::string, int, std::uint64_t>, std::vector<std::size_t>> batches;
      for (std::size_t i = 0; i < rules.size(); ++i) {
        batches[{rules[i].deer_id, static_cast<int>(rules[i].variant), rules[i].seed}].push_back(i);
      }
      for (const auto& [key, members] : batches) {
        auto it = deer.find(std::get<0>(key));
        if (it == deer.end()) throw Error("rule cites unknown record " + std::get<0>(key));
        const auto& first = rules[members.front()];
        const auto facts = corpus::make_fact_variant(
            it->second, first.variant, harness::fact_variant_seed(first.deer_id, first.seed));
        std::vector<pipeline::GeneratedRule> batch;
        for (auto i : members) batch.push_back(rules[i]);
        colm.score(batch, facts, modules);
        for (std::size_t j = 0; j < members.size(); ++j) rules[members[j]] = batch[j];
      }
      pipeline::save_generated_rules(out_path, rules);
      std::printf("scored %zu rules\n", rules.size());
    } else if (filter->parsed()) {
      auto rules = pipeline::load_generated_rules(rules_path);
      const auto thresholds = thresholds_path.empty() ? tuning::ThresholdSet::uniform(0.5)
                                                      : tuning::ThresholdSet::load(thresholds_path);
      thresholds.validate();
      pipeline::apply_verdicts(rules, thresholds, parse_modules(module_names));
      pipeline::save_generated_rules(out_path, rules);
      std::size_t kept = 0;
      for (const auto& r : rules) kept += r.verdict;
      std::printf("retained %zu of %zu rules\n", kept, rules.size());
    } else if (tune->parsed()) {
      const auto backend = backend_from(common);
      pipeline::Colm colm(*backend, pipeline::load_prompt_dir(common.prompts), {},
                          common.max_parallel);
      tuning::TuningPolicy policy;
      policy.grid_step = step;
      policy.objective = objective == "f1" ? tuning::Objective::kF1 : tuning::Objective::kAccuracy;
      policy.validate();
      const auto deerlet = corpus::load_deerlet(deerlet_path);
      auto set = harness::tune_thresholds(colm, deerlet, parse_modules(module_names), policy);
      set.save(out_path);
      for (const auto& [id, t] : set.thresholds) {
        auto fb = set.fallbacks.find(id);
        std::printf("%s %.4f%s\n", std::string(to_string(id)).c_str(), t,
                    fb == set.fallbacks.end() ? "" : ("  fallback: " + fb->second).c_str());
      }
    } else if (eval->parsed()) {
      auto config = harness::load_experiment_config(config_path);
      if (!output_dir.empty()) config.output_dir = output_dir;
      if (!seeds.empty()) config.seeds = seeds;
      const auto result = harness::run_and_write(config);
      std::cout << harness::render_table(result.report);
    } else if (analyze->parsed()) {
      auto config = harness::load_experiment_config(config_path);
      config.breakdowns.clear();
      for (const auto& b : by) {
        auto key = harness::parse_group_key(b);
        if (!key) throw Error("unknown breakdown key: " + b);
        config.breakdowns.push_back(*key);
      }
      const auto backend = harness::make_backend(config.backend);
      auto result = harness::run_experiment(config, *backend);
      result.report.runs.clear();
      std::cout << harness::render_table(result.report);
    } else if (baseline->parsed()) {
      if (kind == "rf") {
        if (deer_path.empty()) throw Error("--deer is required for rf");
        std::vector<corpus::FactVariant> variants;
        for (const auto& v : variant_names) variants.push_back(parse_variant(v));
        if (seeds.empty()) seeds = {0, 1, 2, 3, 4};
        const auto deer = select_split(corpus::load_deer(deer_path), split);
        const auto outcomes = harness::rf_baseline(deer, variants, seeds);
        if (!out_path.empty()) {
          std::vector<pipeline::GeneratedRule> rules;
          for (const auto& o : outcomes) rules.push_back(o.rule);
          pipeline::save_generated_rules(out_path, rules);
        }
        harness::MetricReport r;
        std::tie(r.runs, r.mean) = harness::seed_rows(outcomes, seeds);
        std::cout << harness::render_table(r);
      } else {
        if (deerlet_path.empty()) throw Error("--deerlet is required for " + kind);
        const auto deerlet = corpus::load_deerlet(deerlet_path);
        print_aspects(kind == "tfidf" ? harness::tfidf_baseline(deerlet)
                                      : harness::majority_baseline(deerlet));
      }
    } else if (correlate->parsed()) {
      const auto c = harness::correlate_deerlet(corpus::load_deer(deer_path),
                                                corpus::load_deerlet(deerlet_path));
      std::printf("pairs  %zu\n", c.pairs);
      std::printf("METEOR r = %.4f  p = %.4g\n", c.meteor.r, c.meteor.p_two_tailed);
      std::printf("BLEU   r = %.4f  p = %.4g\n", c.bleu.r, c.bleu.p_two_tailed);
#ifdef COLM_WITH_ANNOTATION
    } else if (serve->parsed()) {
      annotation.deer_path = deer_path;
      annotation.candidates_path = candidates;
      annotation.output_path = output;
      annotation.static_dir = static_dir;
      harness::AnnotationServer server(annotation);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::printf("serving %zu items on http://%s:%d\n", server.store().total(), host.c_str(),
                  port);
      std::fflush(stdout);
      if (!server.listen(host, port)) throw Error("cannot listen on " + host);
      g_server = nullptr;
#endif
    } else if (report->parsed()) {
      std::cout << harness::render_table(harness::report_from_json(read_file(report_path)));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
