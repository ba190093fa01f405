#pragma once

#include <map>
#include <string>
#include <vector>

#include "colm/error.hpp"
#include "colm/module_id.hpp"

namespace colm::tuning {

enum class Objective { kF1, kAccuracy };
enum class TuneMode { kGlobal, kLocal };
enum class LabelScale { kThreePoint, kTwoPoint };

std::string_view to_string(TuneMode mode);
std::string_view to_string(Objective objective);

class TuningError : public Error {
 public:
  enum class Kind { kDegenerateGolds, kNoThreshold, kInvalidInput };

  TuningError(Kind kind, const std::string& message) : Error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct TuningPolicy {
  double grid_step = 0.01;
  double lower = 0.05;
  double upper = 0.95;
  Objective objective = Objective::kF1;  // the other metric breaks ties
  double local_recall_min = 0.7;
  double local_recall_max = 0.9;

  void validate() const;
};

struct TuneResult {
  double threshold = 0.5;
  double objective_value = 0.0;
  double recall_at_threshold = 0.0;
  TuneMode mode = TuneMode::kGlobal;
  double plateau_low = 0.5;   // first grid point of the chosen plateau
  double plateau_high = 0.5;  // last grid point of the chosen plateau
};

// Grid points lower, lower + step, ..., upper (rounded to 1e-12).
std::vector<double> threshold_grid(const TuningPolicy& policy);

// Picks a decision threshold on validation scores. Global mode takes the
// grid points reaching the best objective, provided they accept at least
// one positive and reject at least one item. Otherwise local mode takes
// plateaus that beat both neighbouring grid values with recall inside the
// local band. The midpoint of the longest qualifying plateau is returned.
// Throws TuningError for single-class golds or when nothing qualifies.
TuneResult tune_threshold(const std::vector<double>& scores, const std::vector<bool>& golds,
                          const TuningPolicy& policy = {});

// Partially true counts as true on the 3-point scale.
bool binarize_gold(int label, LabelScale scale);

struct ThresholdSet {
  std::map<ModuleId, double> thresholds;
  std::map<ModuleId, TuneResult> diagnostics;
  // Modules that fell back to a default after a tuning failure, with the
  // reason.
  std::map<ModuleId, std::string> fallbacks;

  static ThresholdSet uniform(double value);

  // Throws TuningError unless every threshold is a verifier in [0.05, 0.95].
  void validate() const;

  // {"M2": t2, ..., "diagnostics": {...}}.
  std::string to_json() const;
  static ThresholdSet from_json(const std::string& text);
  static ThresholdSet load(const std::string& path);
  void save(const std::string& path) const;
};

}  // namespace colm::tuning
