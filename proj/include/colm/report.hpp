#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace colm::harness {

// One line of a results table. METEOR is on the x100 scale. Metrics that
// cannot be computed (no retained rule, fewer than ten rules for WRecall)
// are left unset.
struct MetricRow {
  std::string label;
  std::size_t rules = 0;        // candidates that reached the verifiers
  std::size_t prefiltered = 0;  // candidates removed by the token floor
  std::size_t retained = 0;
  std::optional<double> meteor;
  std::optional<double> wrecall;
  std::optional<double> green;
};

struct HumanEval {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_undefined = false;  // nothing retained; precision reported as 0
  bool recall_undefined = false;     // no correct rule among the labeled ones
  double consistent = 0.0;           // aspect means over retained rules, in [0,1]
  double reality = 0.0;
  double general = 0.0;
  double nontrivial = 0.0;
  std::size_t labeled = 0;
  std::size_t correct = 0;
  std::size_t retained = 0;
};

struct GroupRow {
  std::string group;
  std::size_t records = 0;
  std::size_t candidates = 0;  // every proposed rule in the group
  MetricRow mean;
};

struct MetricReport {
  // Ordered key/value pairs describing the run.
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<MetricRow> runs;  // one per (seed)
  MetricRow mean;
  std::optional<HumanEval> human;
  std::map<std::string, std::vector<GroupRow>> breakdowns;  // keyed by grouping
  std::size_t dropped = 0;
  std::vector<std::string> errors;
};

// Reals are rounded to six decimals so reports compare byte for byte.
double round6(double x);

std::string to_json(const MetricReport& report);
MetricReport report_from_json(const std::string& text);

// Aligned plain-text tables: the run rows and mean first, then human
// evaluation columns when present, then one table per breakdown.
std::string render_table(const MetricReport& report);

}  // namespace colm::harness
