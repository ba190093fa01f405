#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "colm/backend.hpp"
#include "colm/baselines.hpp"
#include "colm/corpus.hpp"
#include "colm/http_backend.hpp"
#include "colm/metrics.hpp"
#include "colm/pipeline.hpp"
#include "colm/report.hpp"
#include "colm/tuning.hpp"

namespace colm::harness {

class HarnessError : public Error {
 public:
  using Error::Error;
};

struct BackendConfig {
  enum class Kind { kMock, kHttp };
  Kind kind = Kind::kMock;
  std::filesystem::path mock_script;  // empty: unscripted mock
  std::optional<std::uint64_t> mock_seed;
  backend::HttpBackendConfig http;
};

enum class GroupKey { kRuleType, kTopic, kVariant, kSpecificity };

std::string_view to_string(GroupKey key);
std::optional<GroupKey> parse_group_key(std::string_view name);

struct ExperimentConfig {
  std::filesystem::path deer_path;
  std::filesystem::path deerlet_path;  // needed when tuning thresholds
  std::filesystem::path labels_path;   // optional human labels keyed by rule_id
  std::filesystem::path prompt_dir;
  std::filesystem::path output_dir;
  BackendConfig backend;
  pipeline::ProposerConfig proposer;
  int k = 10;
  std::vector<corpus::FactVariant> variants = {corpus::FactVariant::kShort3};
  std::optional<corpus::DeerSplit> split = corpus::DeerSplit::kTest;  // nullopt: all records
  std::set<ModuleId> active_modules = {ModuleId::kM2, ModuleId::kM3, ModuleId::kM4,
                                       ModuleId::kM5};
  // Path to a thresholds file, or "tune" to fit them on the DEERLET
  // validation split. Empty means 0.5 for every verifier.
  std::string thresholds;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  int max_parallel = 4;
  std::vector<GroupKey> breakdowns = {GroupKey::kRuleType, GroupKey::kTopic,
                                      GroupKey::kVariant, GroupKey::kSpecificity};

  // Throws HarnessError when a referenced path is missing or a value is out
  // of range.
  void validate() const;
};

// Parses the JSON config. Relative paths resolve against `base_dir`.
ExperimentConfig parse_experiment_config(const std::string& text,
                                         const std::filesystem::path& base_dir);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Reads {"kind": "mock", "script": ..., "seed": ...} or
// {"kind": "http", "base_url": ..., ...}.
BackendConfig parse_backend_config(const std::string& text, const std::filesystem::path& base_dir);
std::unique_ptr<backend::CompletionBackend> make_backend(const BackendConfig& config);

// A scored candidate joined with the metadata of its source record.
struct RuleOutcome {
  pipeline::GeneratedRule rule;
  double meteor = 0.0;  // against the gold rule, in [0,1]
  RuleType rule_type = RuleType::kUnivImpl;
  corpus::Topic topic = corpus::Topic::kZoology;
  corpus::Specificity specificity = corpus::Specificity::kSpecific;
};

// Metrics over one pool of outcomes. METEOR is the mean over retained
// rules (x100); WRecall ranks every non-prefiltered rule; GREEN combines
// the two.
MetricRow metric_row(std::string label, std::span<const RuleOutcome> outcomes);

// Per-seed rows plus their mean. The mean row averages the defined seed
// values and recomputes GREEN from the averaged METEOR and WRecall.
std::pair<std::vector<MetricRow>, MetricRow> seed_rows(std::span<const RuleOutcome> outcomes,
                                                       std::span<const std::uint64_t> seeds);

// Groups that partition the outcomes, in enum order, each with its mean
// row over the seeds.
std::vector<GroupRow> breakdown(std::span<const RuleOutcome> outcomes, GroupKey key,
                                std::span<const std::uint64_t> seeds);

// A rule counts as correct when all four labels binarize to true. Recall
// is measured over the labeled, non-prefiltered rules. Throws HarnessError
// listing every retained rule that has no label.
HumanEval human_eval(std::span<const pipeline::GeneratedRule> rules,
                     const std::map<std::string, metrics::HumanLabels>& labels);

const char* correctness_rule_description();

// Pearson correlation; throws HarnessError on a length mismatch.
metrics::CorrelationResult correlate(std::span<const double> metric_scores,
                                     std::span<const double> human_scores);

struct MetricHumanCorrelation {
  metrics::CorrelationResult meteor;
  metrics::CorrelationResult bleu;
  std::size_t pairs = 0;
};

// Correlates METEOR and BLEU of each DEERLET rule against its gold DEER rule
// with the product of its normalized labels.
MetricHumanCorrelation correlate_deerlet(std::span<const corpus::DeerRecord> deer,
                                         std::span<const corpus::DeerletRecord> deerlet);

// Scores the DEERLET records of `split` with each module and tunes one
// threshold per module against that module's aspect label. Modules whose
// tuning fails fall back to 0.5 and are listed in `fallbacks`.
tuning::ThresholdSet tune_thresholds(const pipeline::Colm& colm,
                                     std::span<const corpus::DeerletRecord> deerlet,
                                     const std::set<ModuleId>& modules,
                                     const tuning::TuningPolicy& policy = {},
                                     corpus::DeerletSplit split = corpus::DeerletSplit::kVal);

// The aspect label a verifier is tuned against.
int aspect_label(const metrics::HumanLabels& labels, ModuleId module);

struct ExperimentResult {
  MetricReport report;
  std::vector<RuleOutcome> outcomes;  // every candidate, in run order
  tuning::ThresholdSet thresholds;
};

// Proposes, verifies, filters and scores every selected record for every
// (variant, seed), then aggregates. Deterministic for a deterministic
// backend: records run in parallel but results are joined in input order.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const backend::CompletionBackend& backend);

// Per-aspect evaluation of a DEERLET classifier: the aspect's label is the
// gold, and the threshold is tuned on the validation split and applied to
// the test split.
struct AspectClassification {
  ModuleId module = ModuleId::kM2;
  std::string aspect;
  double threshold = 0.5;
  std::string threshold_fallback;  // reason when tuning failed and 0.5 was used
  metrics::ClassificationMetrics metrics;
  double positive_rate = 0.0;
  std::size_t n = 0;
};

std::string_view aspect_name(ModuleId module);

// TF-IDF baseline: fitted on the train split, one fact-rule score per record.
std::vector<AspectClassification> tfidf_baseline(std::span<const corpus::DeerletRecord> deerlet,
                                                 const tuning::TuningPolicy& policy = {});

// Majority-class baseline on the test split.
std::vector<AspectClassification> majority_baseline(
    std::span<const corpus::DeerletRecord> deerlet);

// R+F baseline: one filled template per (record, variant, seed), all
// retained, scored with METEOR against the gold rule.
std::vector<RuleOutcome> rf_baseline(std::span<const corpus::DeerRecord> deer,
                                     std::span<const corpus::FactVariant> variants,
                                     std::span<const std::uint64_t> seeds, int k = 1);

// Seed of the fact variant built for a record in a run with `seed`.
std::uint64_t fact_variant_seed(const std::string& deer_id, std::uint64_t seed);

// Runs the experiment with the configured backend and writes rules.jsonl,
// thresholds.json, report.json and report.txt to the output directory.
ExperimentResult run_and_write(const ExperimentConfig& config);

}  // namespace colm::harness
