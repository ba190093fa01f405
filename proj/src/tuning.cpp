#include "colm/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "colm/metrics.hpp"

namespace colm::tuning {

namespace {

constexpr double kTie = 1e-12;

struct GridPoint {
  double t = 0.0;
  double primary = 0.0;
  double secondary = 0.0;
  double recall = 0.0;
  std::size_t rejected = 0;
};

// -1, 0, 1 comparing (primary, secondary) lexicographically.
int compare_keys(const GridPoint& a, const GridPoint& b) {
  if (a.primary > b.primary + kTie) return 1;
  if (a.primary < b.primary - kTie) return -1;
  if (a.secondary > b.secondary + kTie) return 1;
  if (a.secondary < b.secondary - kTie) return -1;
  return 0;
}

GridPoint evaluate(double t, const std::vector<double>& scores, const std::vector<bool>& golds,
                   Objective objective) {
  const auto m = metrics::classification_metrics(scores, golds, t);
  GridPoint p;
  p.t = t;
  p.primary = objective == Objective::kF1 ? m.f1 : m.accuracy;
  p.secondary = objective == Objective::kF1 ? m.accuracy : m.f1;
  p.recall = m.recall;
  p.rejected = static_cast<std::size_t>(
      std::count_if(scores.begin(), scores.end(), [t](double s) { return s < t; }));
  return p;
}

// Longest run of consecutive indices in `chosen` (sorted ascending); ties go
// to the earliest run.
std::pair<std::size_t, std::size_t> longest_run(const std::vector<std::size_t>& chosen) {
  std::size_t best_begin = chosen.front(), best_end = chosen.front();
  std::size_t begin = chosen.front();
  for (std::size_t i = 1; i <= chosen.size(); ++i) {
    if (i < chosen.size() && chosen[i] == chosen[i - 1] + 1) continue;
    const std::size_t end = chosen[i - 1];
    if (end - begin > best_end - best_begin) {
      best_begin = begin;
      best_end = end;
    }
    if (i < chosen.size()) begin = chosen[i];
  }
  return {best_begin, best_end};
}

}  // namespace

std::string_view to_string(TuneMode mode) { return mode == TuneMode::kGlobal ? "global" : "local"; }

std::string_view to_string(Objective objective) {
  return objective == Objective::kF1 ? "f1" : "accuracy";
}

void TuningPolicy::validate() const {
  if (!(grid_step > 0.0 && grid_step < 0.1)) {
    throw TuningError(TuningError::Kind::kInvalidInput, "grid_step must lie in (0, 0.1)");
  }
  if (!(lower < upper)) throw TuningError(TuningError::Kind::kInvalidInput, "empty bounds");
  if (!(local_recall_min <= local_recall_max)) {
    throw TuningError(TuningError::Kind::kInvalidInput, "empty local recall band");
  }
}

std::vector<double> threshold_grid(const TuningPolicy& policy) {
  policy.validate();
  const auto steps = static_cast<std::size_t>(std::llround((policy.upper - policy.lower) / policy.grid_step));
  std::vector<double> grid;
  grid.reserve(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) {
    const double t = policy.lower + static_cast<double>(i) * policy.grid_step;
    grid.push_back(std::round(t * 1e12) / 1e12);
  }
  return grid;
}

TuneResult tune_threshold(const std::vector<double>& scores, const std::vector<bool>& golds,
                          const TuningPolicy& policy) {
  if (scores.size() != golds.size() || scores.empty()) {
    throw TuningError(TuningError::Kind::kInvalidInput, "scores and golds must be non-empty and equal length");
  }
  const auto positives = std::count(golds.begin(), golds.end(), true);
  if (positives == 0 || positives == static_cast<std::ptrdiff_t>(golds.size())) {
    throw TuningError(TuningError::Kind::kDegenerateGolds,
                      "tuning needs at least one positive and one negative gold");
  }

  const auto grid = threshold_grid(policy);
  std::vector<GridPoint> points;
  points.reserve(grid.size());
  for (double t : grid) points.push_back(evaluate(t, scores, golds, policy.objective));

  TuneResult result;
  std::vector<std::size_t> chosen;

  // Global optimum.
  const GridPoint* best = &points.front();
  for (const auto& p : points) {
    if (compare_keys(p, *best) > 0) best = &p;
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (compare_keys(p, *best) == 0 && p.recall > 0.0 && p.rejected > 0) chosen.push_back(i);
  }
  result.mode = TuneMode::kGlobal;

  if (chosen.empty()) {
    // Local optima: maximal runs of equal keys whose neighbouring runs are
    // strictly worse.
    result.mode = TuneMode::kLocal;
    std::vector<std::size_t> candidates;
    for (std::size_t begin = 0; begin < points.size();) {
      std::size_t end = begin;
      while (end + 1 < points.size() && compare_keys(points[end + 1], points[begin]) == 0) ++end;
      const bool beats_left = begin == 0 || compare_keys(points[begin], points[begin - 1]) > 0;
      const bool beats_right =
          end + 1 == points.size() || compare_keys(points[end], points[end + 1]) > 0;
      if (beats_left && beats_right) {
        for (std::size_t i = begin; i <= end; ++i) {
          const double r = points[i].recall;
          if (r >= policy.local_recall_min - kTie && r <= policy.local_recall_max + kTie) {
            candidates.push_back(i);
          }
        }
      }
      begin = end + 1;
    }
    if (candidates.empty()) {
      throw TuningError(TuningError::Kind::kNoThreshold, "no qualifying threshold on the grid");
    }
    const GridPoint* top = &points[candidates.front()];
    for (std::size_t i : candidates) {
      if (compare_keys(points[i], *top) > 0) top = &points[i];
    }
    for (std::size_t i : candidates) {
      if (compare_keys(points[i], *top) == 0) chosen.push_back(i);
    }
  }

  const auto [lo, hi] = longest_run(chosen);
  result.plateau_low = points[lo].t;
  result.plateau_high = points[hi].t;
  result.threshold = std::round((points[lo].t + points[hi].t) / 2.0 * 1e12) / 1e12;
  const GridPoint at = evaluate(result.threshold, scores, golds, policy.objective);
  result.objective_value = at.primary;
  result.recall_at_threshold = at.recall;
  return result;
}

bool binarize_gold(int label, LabelScale scale) {
  if (scale == LabelScale::kThreePoint) {
    if (label < 0 || label > 2) throw TuningError(TuningError::Kind::kInvalidInput, "3-point label out of range");
    return label >= 1;
  }
  if (label < 0 || label > 1) throw TuningError(TuningError::Kind::kInvalidInput, "2-point label out of range");
  return label == 1;
}

ThresholdSet ThresholdSet::uniform(double value) {
  ThresholdSet s;
  for (auto id : kVerifierModules) s.thresholds[id] = value;
  return s;
}

void ThresholdSet::validate() const {
  for (const auto& [id, t] : thresholds) {
    if (!is_verifier(id)) {
      throw TuningError(TuningError::Kind::kInvalidInput, "thresholds apply to M2..M5 only");
    }
    if (!(t >= 0.05 - kTie && t <= 0.95 + kTie)) {
      throw TuningError(TuningError::Kind::kInvalidInput,
                        std::string(colm::to_string(id)) + " threshold outside [0.05, 0.95]");
    }
  }
}

std::string ThresholdSet::to_json() const {
  nlohmann::ordered_json j;
  for (const auto& [id, t] : thresholds) j[std::string(colm::to_string(id))] = t;
  nlohmann::ordered_json diag = nlohmann::ordered_json::object();
  for (const auto& [id, d] : diagnostics) {
    nlohmann::ordered_json e;
    e["mode"] = to_string(d.mode);
    e["objective_value"] = d.objective_value;
    e["recall_at_threshold"] = d.recall_at_threshold;
    e["plateau_low"] = d.plateau_low;
    e["plateau_high"] = d.plateau_high;
    diag[std::string(colm::to_string(id))] = e;
  }
  for (const auto& [id, reason] : fallbacks) {
    diag[std::string(colm::to_string(id))]["fallback"] = reason;
  }
  j["diagnostics"] = diag;
  return j.dump(2);
}

ThresholdSet ThresholdSet::from_json(const std::string& text) {
  ThresholdSet s;
  try {
    const auto j = nlohmann::json::parse(text);
    for (auto id : kVerifierModules) {
      const std::string key(colm::to_string(id));
      if (j.contains(key)) s.thresholds[id] = j.at(key).get<double>();
    }
    if (auto d = j.find("diagnostics"); d != j.end() && d->is_object()) {
      for (const auto& [key, e] : d->items()) {
        auto id = parse_module_id(key);
        if (!id) continue;
        if (e.contains("mode")) {
          TuneResult r;
          r.mode = e.at("mode").get<std::string>() == "local" ? TuneMode::kLocal : TuneMode::kGlobal;
          r.threshold = s.thresholds.count(*id) ? s.thresholds.at(*id) : 0.5;
          r.objective_value = e.value("objective_value", 0.0);
          r.recall_at_threshold = e.value("recall_at_threshold", 0.0);
          r.plateau_low = e.value("plateau_low", r.threshold);
          r.plateau_high = e.value("plateau_high", r.threshold);
          s.diagnostics[*id] = r;
        }
        if (e.contains("fallback")) s.fallbacks[*id] = e.at("fallback").get<std::string>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw TuningError(TuningError::Kind::kInvalidInput, std::string("bad thresholds file: ") + e.what());
  }
  s.validate();
  return s;
}

ThresholdSet ThresholdSet::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TuningError(TuningError::Kind::kInvalidInput, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

void ThresholdSet::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw TuningError(TuningError::Kind::kInvalidInput, "cannot write " + path);
  out << to_json() << '\n';
}

}  // namespace colm::tuning
