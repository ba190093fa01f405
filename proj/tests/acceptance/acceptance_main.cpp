// Acceptance suite: one PASS/FAIL line per primary criterion. Exits
// nonzero when any criterion fails.

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "colm/baselines.hpp"
#include "colm/harness.hpp"
#include "colm/metrics.hpp"
#include "colm/mock_backend.hpp"
#include "colm/pipeline.hpp"
#include "colm/random.hpp"
#include "colm/tuning.hpp"
#include "test_support.hpp"

namespace {

using namespace colm;
using colm::testing::source_path;

// Collects the failed sub-checks of one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    if (!ok) ++failed_;
    ++total_;
  }
  void near(double actual, double expected, double tol, const std::string& what) {
    std::ostringstream s;
    s.precision(10);
    s << what << ": got " << actual << ", want " << expected << " +/- " << tol;
    expect(std::fabs(actual - expected) <= tol, s.str());
  }
  bool ok() const { return failed_ == 0 && total_ > 0; }
  std::string summary() const {
    std::ostringstream s;
    s << (total_ - failed_) << "/" << total_ << " checks";
    for (const auto& f : failures_) s << "; " << f;
    return s.str();
  }

 private:
  std::vector<std::string> failures_;
  int failed_ = 0;
  int total_ = 0;
};

int g_failed = 0;

void run(const char* name, double budget_s, const std::function<void(Check&)>& body) {
  Check c;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.expect(false, std::string("exception: ") + e.what());
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ostringstream budget;
  budget.precision(3);
  budget << "runtime " << elapsed << " s exceeds " << budget_s << " s";
  c.expect(elapsed <= budget_s, budget.str());
  const bool ok = c.ok();
  if (!ok) ++g_failed;
  std::printf("%s %s (%.2f s): %s\n", ok ? "PASS" : "FAIL", name, elapsed, c.summary().c_str());
  std::fflush(stdout);
}

std::vector<metrics::ScoredRule> ranked(const std::vector<bool>& mask) {
  std::vector<metrics::ScoredRule> rules;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    rules.push_back({"r" + std::to_string(i), 1.0 - static_cast<double>(i) * 1e-4, mask[i]});
  }
  return rules;
}

double hand_meteor(double m, double c, double r, double chunks) {
  if (m == 0) return 0.0;
  const double p = m / c, rec = m / r;
  return p * rec / (0.9 * p + 0.1 * rec) * (1.0 - 0.5 * std::pow(chunks / m, 3.0));
}

// Scripted backend for the pipeline checks: M1 prompts get the scripted
// rules, verifier prompts a hashed probability. Records verifier prompts.
class CountingBackend : public backend::CompletionBackend {
 public:
  explicit CountingBackend(std::vector<std::string> rules) : rules_(std::move(rules)) {}

  backend::CompletionResponse complete(const backend::CompletionRequest& req) const override {
    backend::CompletionResponse r;
    if (req.prompt.find("Template:") != std::string::npos) {
      r.text = rules_[req.seed.value_or(0) % rules_.size()];
      return r;
    }
    {
      std::lock_guard lock(mu_);
      verifier_prompts_.push_back(req.prompt);
    }
    const double p = 0.01 + 0.98 * static_cast<double>(stable_hash(req.prompt, 7) % 10007) / 10006.0;
    r.first_token_logprobs = {{" yes", std::log(p)}, {" no", std::log1p(-p)}};
    return r;
  }

  std::vector<std::string> verifier_prompts() const {
    std::lock_guard lock(mu_);
    return verifier_prompts_;
  }

 private:
  std::vector<std::string> rules_;
  mutable std::mutex mu_;
  mutable std::vector<std::string> verifier_prompts_;
};

corpus::FactInput three_facts() {
  corpus::FactInput f;
  f.texts = {"Polar bears have thick fur.", "Seals keep warm with blubber.",
             "Penguins huddle in the cold."};
  return f;
}

// Brute-force global-mode oracle over the 91-point grid.
std::optional<double> tuner_oracle(const std::vector<double>& s, const std::vector<bool>& g) {
  std::vector<std::pair<double, double>> keys;
  std::vector<bool> eligible;
  for (int i = 5; i <= 95; ++i) {
    const double t = i / 100.0;
    int tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (s[k] >= t) {
        (g[k] ? tp : fp)++;
      } else {
        (g[k] ? fn : tn)++;
      }
    }
    keys.push_back({tp == 0 ? 0.0 : 2.0 * tp / (2.0 * tp + fp + fn),
                    static_cast<double>(tp + tn) / static_cast<double>(s.size())});
    eligible.push_back(tp > 0 && fn + tn > 0);
  }
  const auto same = [](auto a, auto b) {
    return std::fabs(a.first - b.first) <= 1e-12 && std::fabs(a.second - b.second) <= 1e-12;
  };
  auto best = keys[0];
  for (const auto& k : keys) {
    if (k.first > best.first + 1e-12 ||
        (std::fabs(k.first - best.first) <= 1e-12 && k.second > best.second + 1e-12)) {
      best = k;
    }
  }
  int run_lo = -1, run_hi = -2, lo = -1;
  for (int i = 0; i <= 91; ++i) {
    const bool in = i < 91 && eligible[i] && same(keys[i], best);
    if (in && lo < 0) lo = i;
    if (!in && lo >= 0) {
      if (i - 1 - lo > run_hi - run_lo) {
        run_lo = lo;
        run_hi = i - 1;
      }
      lo = -1;
    }
  }
  if (run_lo < 0) return std::nullopt;
  return (run_lo + run_hi + 10) / 200.0;
}

void green_table(Check& c) {
  c.near(metrics::green(25.28, 0.50), 3.56, 0.01, "M1 row");
  c.near(metrics::green(26.44, 0.54), 3.78, 0.01, "CoLM row");
}

void wrecall_identities(Check& c) {
  c.expect(metrics::wrecall(ranked(std::vector<bool>(100, true))).value == 0.5, "keep-all = 0.5");
  c.expect(metrics::wrecall(ranked(std::vector<bool>(100, false))).value == 0.5, "keep-none = 0.5");
  std::vector<bool> top(100, false), bottom(100, false);
  for (int i = 0; i < 10; ++i) {
    top[i] = true;
    bottom[90 + i] = true;
  }
  c.near(metrics::wrecall(ranked(top)).value, 0.68, 1e-12, "top decile");
  c.near(metrics::wrecall(ranked(bottom)).value, 0.32, 1e-12, "bottom decile");
  std::mt19937_64 rng(1000);
  int in_range = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 10 + rng() % 200;
    std::vector<bool> mask(n);
    for (std::size_t i = 0; i < n; ++i) mask[i] = (rng() & 1) != 0;
    const double v = metrics::wrecall(ranked(mask)).value;
    in_range += v >= 0.0 && v <= 1.0;
  }
  c.expect(in_range == 1000, "1000 random masks in [0,1]");
}

void meteor_oracles(Check& c) {
  struct Case {
    const char* cand;
    const char* ref;
    double expected;
  };
  const Case cases[] = {
      {"the cat sat", "the cat sat", 0.98148148148},
      {"cats", "cats", 0.5},
      {"cats", "cat", 0.5},
      {"dog", "bird", 0.0},
      {"", "bird", 0.0},
      {"b a", "a b", 0.5},
      {"a b c d", "c d a b", hand_meteor(4, 4, 4, 2)},
      {"the the", "the", hand_meteor(1, 2, 1, 1)},
      {"cat sat", "the cat sat on the mat", hand_meteor(2, 2, 6, 1)},
      {"running dogs", "run dog", hand_meteor(2, 2, 2, 1)},
      {"The Cat", "the cat", hand_meteor(2, 2, 2, 1)},
      {"a b a", "a b", hand_meteor(2, 3, 2, 2)},
  };
  for (const auto& k : cases) {
    c.near(metrics::meteor(k.cand, k.ref), k.expected, 1e-6,
           std::string("hand '") + k.cand + "' vs '" + k.ref + "'");
  }
  std::ifstream in(source_path("tests/data/meteor_reference.jsonl"));
  std::string line;
  int pairs = 0;
  double worst = 0.0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    const double got = metrics::meteor(j["candidate"].get<std::string>(),
                                       j["reference"].get<std::string>());
    worst = std::max(worst, std::fabs(got - j["meteor"].get<double>()));
    ++pairs;
  }
  c.expect(pairs == 50, "50 reference pairs");
  c.near(worst, 0.0, 0.02, "max deviation from reference implementation");
}

void pearson_oracle(Check& c) {
  const std::vector<double> xs = {1, 2, 3}, ys = {3, 1, 2};
  const auto r = metrics::pearson(xs, ys);
  boost::math::students_t one(1.0);
  const double t = -0.5 * std::sqrt(1.0 / 0.75);
  const double p_oracle = 2.0 * boost::math::cdf(boost::math::complement(one, std::fabs(t)));
  c.near(r.r, -0.5, 1e-3, "r");
  c.near(r.p_two_tailed, p_oracle, 1e-3, "p vs Student t oracle");
  c.near(p_oracle, 2.0 / 3.0, 1e-3, "oracle p");

  std::mt19937_64 rng(100);
  std::normal_distribution<double> normal;
  int invariant = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + rng() % 30;
    std::vector<double> a(n), b(n), a2(n), b2(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = normal(rng);
      b[i] = a[i] + normal(rng);
    }
    const double scale = 0.5 + static_cast<double>(rng() % 50);
    for (std::size_t i = 0; i < n; ++i) {
      a2[i] = scale * a[i] - 4.0;
      b2[i] = b[i] / scale + 9.0;
    }
    const auto p = metrics::pearson(a, b), q = metrics::pearson(a2, b2);
    invariant += std::fabs(p.r - q.r) <= 1e-9 && std::fabs(p.p_two_tailed - q.p_two_tailed) <= 1e-9;
  }
  c.expect(invariant == 100, "affine invariance on 100 random vectors");
}

void conjunction_identity(Check& c) {
  std::vector<std::string> texts;
  for (int i = 0; i < 200; ++i) texts.push_back(colm::testing::words(50, "w" + std::to_string(i) + "x"));
  CountingBackend backend(texts);
  const pipeline::Colm colm(backend, pipeline::load_prompt_dir(source_path("prompts")), {}, 4);
  auto proposals = colm.propose(three_facts(), templates::template_for(RuleType::kUnivImpl), 200,
                                0, "accept");
  c.expect(proposals.rules.size() == 200, "200 scripted rules proposed");
  const std::set<ModuleId> all(std::begin(kVerifierModules), std::end(kVerifierModules));
  colm.score(proposals.rules, three_facts(), all);
  auto th = tuning::ThresholdSet::uniform(0.5);
  th.thresholds[ModuleId::kM2] = 0.3;
  th.thresholds[ModuleId::kM3] = 0.45;
  th.thresholds[ModuleId::kM4] = 0.6;
  th.thresholds[ModuleId::kM5] = 0.4;

  std::set<std::string> intersection;
  for (const auto& r : proposals.rules) intersection.insert(r.rule_id);
  for (auto m : kVerifierModules) {
    std::set<std::string> kept;
    for (const auto& r : pipeline::filter_rules(proposals.rules, th, {m})) kept.insert(r.rule_id);
    std::set<std::string> next;
    std::set_intersection(intersection.begin(), intersection.end(), kept.begin(), kept.end(),
                          std::inserter(next, next.begin()));
    intersection = std::move(next);
  }
  std::set<std::string> joint;
  for (const auto& r : pipeline::filter_rules(proposals.rules, th, all)) joint.insert(r.rule_id);
  c.expect(joint == intersection, "all-module filter equals intersection of single filters");
  c.expect(!joint.empty() && joint.size() < 200, "filter keeps a proper nonempty subset");

  int products = 0;
  for (const auto& r : proposals.rules) {
    double prod = 1.0;
    for (auto m : kVerifierModules) prod *= r.scores.at(m);
    products += r.combined && std::fabs(*r.combined - prod) <= 1e-12;
  }
  c.expect(products == 200, "combined score equals product of four scores for every rule");
}

void prefilter(Check& c) {
  const std::string short_rule = colm::testing::words(10, "short");
  const std::string long_rule = colm::testing::words(50, "long");
  CountingBackend backend({short_rule, long_rule});
  const pipeline::Colm colm(backend, pipeline::load_prompt_dir(source_path("prompts")), {}, 1);
  auto p = colm.propose(three_facts(), templates::template_for(RuleType::kUnivImpl), 2, 0, "pf");
  c.expect(p.rules.size() == 2, "two scripted rules");
  if (p.rules.size() != 2) return;
  c.expect(p.rules[0].token_count == 10 && p.rules[0].prefiltered, "10-token rule prefiltered");
  c.expect(p.rules[1].token_count == 50 && !p.rules[1].prefiltered, "50-token rule kept");
  const std::set<ModuleId> all(std::begin(kVerifierModules), std::end(kVerifierModules));
  colm.score(p.rules, three_facts(), all);
  int short_seen = 0, long_seen = 0;
  for (const auto& prompt : backend.verifier_prompts()) {
    short_seen += prompt.find(short_rule) != std::string::npos;
    long_seen += prompt.find(long_rule) != std::string::npos;
  }
  c.expect(short_seen == 0 && p.rules[0].scores.empty(), "short rule never reaches a verifier");
  c.expect(long_seen == 4 && p.rules[1].scores.size() == 4, "long rule verified by all four");
  c.expect(!pipeline::passes(p.rules[0], tuning::ThresholdSet::uniform(0.05), all),
           "prefiltered rule is never retained");
}

void tuner(Check& c) {
  const auto r = tuning::tune_threshold({0.9, 0.8, 0.7, 0.2, 0.3}, {true, true, true, false, false});
  c.expect(r.threshold > 0.30 && r.threshold <= 0.70, "threshold in (0.30, 0.70]");
  c.near(r.objective_value, 1.0, 1e-12, "f1");
  c.expect(r.threshold >= 0.05 && r.threshold <= 0.95, "within bounds");

  std::mt19937_64 rng(4242);
  int compared = 0, agree = 0;
  while (compared < 100) {
    const std::size_t n = 5 + rng() % 25;
    std::vector<double> s(n);
    std::vector<bool> g(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng() % 1001) / 1000.0;
      g[i] = (rng() % 2) == 0;
    }
    const auto pos = std::count(g.begin(), g.end(), true);
    if (pos == 0 || pos == static_cast<std::ptrdiff_t>(n)) continue;
    const auto oracle = tuner_oracle(s, g);
    if (!oracle) continue;
    ++compared;
    const auto t = tuning::tune_threshold(s, g);
    agree += t.mode == tuning::TuneMode::kGlobal && std::fabs(t.threshold - *oracle) <= 1e-9;
  }
  c.expect(agree == 100, "brute-force grid oracle agrees on 100 random sets (" +
                             std::to_string(agree) + ")");
}

void golden(Check& c) {
  const auto config = harness::load_experiment_config(source_path("tests/golden/experiment.json"));
  const auto backend = harness::make_backend(config.backend);
  const auto result = harness::run_experiment(config, *backend);
  const std::string json = harness::to_json(result.report);
  const std::string table = harness::render_table(result.report);
  c.expect(json == colm::testing::read_file(source_path("tests/golden/report.json")),
           "report.json matches byte for byte");
  c.expect(table == colm::testing::read_file(source_path("tests/golden/report.txt")),
           "report.txt matches byte for byte");

  std::vector<harness::MetricRow> rows = result.report.runs;
  rows.push_back(result.report.mean);
  for (const auto& [key, groups] : result.report.breakdowns) {
    for (const auto& g : groups) rows.push_back(g.mean);
  }
  int defined = 0;
  for (const auto& row : rows) {
    if (!row.green) {
      c.expect(!row.meteor || !row.wrecall, row.label + ": GREEN missing with both inputs set");
      continue;
    }
    ++defined;
    const double lhs = *row.green * *row.green;
    const double rhs = *row.meteor * *row.wrecall;
    c.expect(std::fabs(lhs - rhs) <= 1e-9 * std::max(1.0, rhs), row.label + ": GREEN^2 = METEOR*WRecall");
  }
  c.expect(defined >= 4, "at least four rows with GREEN defined");
}

void baseline_contracts(Check& c) {
  const auto deer = colm::testing::fixture_deer();
  int conform = 0;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const auto& rec = deer[seed % deer.size()];
    const auto type = kAllRuleTypes[(seed / deer.size()) % 4];
    const auto facts = corpus::make_fact_variant(
        rec, static_cast<corpus::FactVariant>(seed % 5), seed);
    const auto tmpl = templates::template_for(type);
    conform += templates::conforms_to(baselines::rf_generate(facts, tmpl, seed), tmpl);
  }
  c.expect(conform == 500, "R+F conforms on 500 draws (" + std::to_string(conform) + ")");

  const auto deerlet = colm::testing::fixture_deerlet();
  for (const auto& a : harness::majority_baseline(deerlet)) {
    std::size_t pos = 0, n = 0;
    for (const auto& r : deerlet) {
      if (r.split != corpus::DeerletSplit::kTest) continue;
      ++n;
      const int label = harness::aspect_label(r.labels, a.module);
      pos += a.module == ModuleId::kM5 ? label == 1 : label >= 1;
    }
    c.near(a.metrics.accuracy, static_cast<double>(pos) / static_cast<double>(n), 1e-12,
           "majority accuracy = positive rate (" + a.aspect + ")");
  }

  const auto model = baselines::tfidf_fit(baselines::tfidf_training_corpus(deerlet));
  for (const auto& r : deerlet) {
    c.expect(baselines::tfidf_score(r.rule_text, r.rule_text, model) == 1.0,
             "TF-IDF identical text = 1.0");
  }
}

}  // namespace

int main() {
  run("green-reference-rows", 1.0, green_table);
  run("wrecall-identities", 1.0, wrecall_identities);
  run("meteor-oracles", 5.0, meteor_oracles);
  run("pearson-oracle", 1.0, pearson_oracle);
  run("conjunction-identity", 10.0, conjunction_identity);
  run("prefilter", 1.0, prefilter);
  run("threshold-tuner", 5.0, tuner);
  run("golden-end-to-end", 30.0, golden);
  run("baseline-contracts", 5.0, baseline_contracts);
  std::printf("%s: %d failed\n", g_failed == 0 ? "ALL PASS" : "SOME FAILED", g_failed);
  return g_failed == 0 ? 0 : 1;
}
