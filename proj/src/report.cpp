#include "colm/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "colm/error.hpp"

namespace colm::harness {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json opt(const std::optional<double>& v) {
  return v ? ordered_json(round6(*v)) : ordered_json(nullptr);
}

std::optional<double> opt_from(const ordered_json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<double>();
}

ordered_json row_json(const MetricRow& r) {
  ordered_json j;
  j["label"] = r.label;
  j["rules"] = r.rules;
  j["prefiltered"] = r.prefiltered;
  j["retained"] = r.retained;
  j["meteor"] = opt(r.meteor);
  j["wrecall"] = opt(r.wrecall);
  j["green"] = opt(r.green);
  return j;
}

MetricRow row_from(const ordered_json& j) {
  MetricRow r;
  r.label = j.at("label").get<std::string>();
  r.rules = j.at("rules").get<std::size_t>();
  r.prefiltered = j.at("prefiltered").get<std::size_t>();
  r.retained = j.at("retained").get<std::size_t>();
  r.meteor = opt_from(j, "meteor");
  r.wrecall = opt_from(j, "wrecall");
  r.green = opt_from(j, "green");
  return r;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string fmt_opt(const char* spec, const std::optional<double>& v) {
  return v ? fmt(spec, *v) : std::string("-");
}

// Renders rows with the first column left-aligned and the rest right-aligned.
std::string table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& row : rows) {
    width.resize(std::max(width.size(), row.size()), 0);
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      const std::string pad(width[c] - row[c].size(), ' ');
      if (c > 0) line += "  ";
      line += c == 0 ? row[c] + pad : pad + row[c];
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + '\n';
  }
  return out;
}

std::vector<std::string> metric_cells(const MetricRow& r) {
  return {r.label,
          std::to_string(r.rules),
          std::to_string(r.retained),
          fmt_opt("%.2f", r.meteor),
          fmt_opt("%.2f", r.wrecall),
          fmt_opt("%.2f", r.green)};
}

}  // namespace

double round6(double x) {
  const double r = std::round(x * 1e6) / 1e6;
  return r == 0.0 ? 0.0 : r;  // no negative zero
}

std::string to_json(const MetricReport& report) {
  ordered_json j;
  ordered_json meta = ordered_json::object();
  for (const auto& [k, v] : report.metadata) meta[k] = v;
  j["metadata"] = meta;
  j["runs"] = ordered_json::array();
  for (const auto& r : report.runs) j["runs"].push_back(row_json(r));
  j["mean"] = row_json(report.mean);
  if (report.human) {
    const HumanEval& h = *report.human;
    ordered_json hj;
    hj["precision"] = round6(h.precision);
    hj["recall"] = round6(h.recall);
    hj["f1"] = round6(h.f1);
    hj["precision_undefined"] = h.precision_undefined;
    hj["recall_undefined"] = h.recall_undefined;
    hj["consistent"] = round6(h.consistent);
    hj["reality"] = round6(h.reality);
    hj["general"] = round6(h.general);
    hj["nontrivial"] = round6(h.nontrivial);
    hj["labeled"] = h.labeled;
    hj["correct"] = h.correct;
    hj["retained"] = h.retained;
    j["human"] = hj;
  } else {
    j["human"] = nullptr;
  }
  ordered_json groups = ordered_json::object();
  for (const auto& [key, rows] : report.breakdowns) {
    ordered_json arr = ordered_json::array();
    for (const auto& g : rows) {
      ordered_json gj;
      gj["group"] = g.group;
      gj["records"] = g.records;
      gj["candidates"] = g.candidates;
      gj["mean"] = row_json(g.mean);
      arr.push_back(gj);
    }
    groups[key] = arr;
  }
  j["breakdowns"] = groups;
  j["dropped"] = report.dropped;
  j["errors"] = report.errors;
  return j.dump(2) + "\n";
}

MetricReport report_from_json(const std::string& text) {
  try {
    const ordered_json j = ordered_json::parse(text);
    MetricReport r;
    for (const auto& [k, v] : j.at("metadata").items()) r.metadata.emplace_back(k, v.get<std::string>());
    for (const auto& row : j.at("runs")) r.runs.push_back(row_from(row));
    r.mean = row_from(j.at("mean"));
    if (!j.at("human").is_null()) {
      const ordered_json& hj = j["human"];
      HumanEval h;
      h.precision = hj.at("precision").get<double>();
      h.recall = hj.at("recall").get<double>();
      h.f1 = hj.at("f1").get<double>();
      h.precision_undefined = hj.at("precision_undefined").get<bool>();
      h.recall_undefined = hj.at("recall_undefined").get<bool>();
      h.consistent = hj.at("consistent").get<double>();
      h.reality = hj.at("reality").get<double>();
      h.general = hj.at("general").get<double>();
      h.nontrivial = hj.at("nontrivial").get<double>();
      h.labeled = hj.at("labeled").get<std::size_t>();
      h.correct = hj.at("correct").get<std::size_t>();
      h.retained = hj.at("retained").get<std::size_t>();
      r.human = h;
    }
    for (const auto& [key, rows] : j.at("breakdowns").items()) {
      auto& out = r.breakdowns[key];
      for (const auto& g : rows) {
        out.push_back({g.at("group").get<std::string>(), g.at("records").get<std::size_t>(),
                       g.at("candidates").get<std::size_t>(), row_from(g.at("mean"))});
      }
    }
    r.dropped = j.at("dropped").get<std::size_t>();
    r.errors = j.at("errors").get<std::vector<std::string>>();
    return r;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed report: ") + e.what());
  }
}

std::string render_table(const MetricReport& report) {
  std::string out;
  std::vector<std::vector<std::string>> rows = {
      {"Run", "Rules", "Retained", "METEOR", "WRecall", "GREEN"}};
  for (const auto& r : report.runs) rows.push_back(metric_cells(r));
  rows.push_back(metric_cells(report.mean));
  out += table(rows);

  if (report.human) {
    const HumanEval& h = *report.human;
    out += "\n";
    out += table({{"Precision (%)", "Recall (%)", "F1", "Consistent", "Reality", "General",
                   "Non-trivial"},
                  {fmt("%.1f", 100.0 * h.precision), fmt("%.1f", 100.0 * h.recall),
                   fmt("%.3f", h.f1), fmt("%.3f", h.consistent), fmt("%.3f", h.reality),
                   fmt("%.3f", h.general), fmt("%.3f", h.nontrivial)}});
  }

  for (const auto& [key, groups] : report.breakdowns) {
    out += "\nBy " + key + "\n";
    std::vector<std::vector<std::string>> g_rows = {
        {key, "Records", "Rules", "Retained", "METEOR", "WRecall", "GREEN"}};
    for (const auto& g : groups) {
      auto cells = metric_cells(g.mean);
      cells[0] = g.group;
      cells.insert(cells.begin() + 1, std::to_string(g.records));
      g_rows.push_back(std::move(cells));
    }
    out += table(g_rows);
  }
  return out;
}

}  // namespace colm::harness
