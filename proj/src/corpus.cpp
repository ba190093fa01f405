#include "colm/corpus.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "colm/random.hpp"
#include "colm/text.hpp"

namespace colm::corpus {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr std::array<std::string_view, 6> kTopicNames = {"zoology",   "botany",  "geology",
                                                         "astronomy", "history", "physics"};
constexpr std::array<std::string_view, 2> kSpecificityNames = {"specific", "general"};
constexpr std::array<std::string_view, 2> kDeerSplitNames = {"train", "test"};
constexpr std::array<std::string_view, 3> kDeerletSplitNames = {"train", "val", "test"};
constexpr std::array<std::string_view, 5> kVariantNames = {"long1", "short1", "short2", "short3",
                                                           "short3_missing"};

template <typename Enum, std::size_t N>
std::optional<Enum> parse_enum(const std::array<std::string_view, N>& names, std::string_view s) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<Enum>(i);
  }
  return std::nullopt;
}

std::string describe(std::size_t line) {
  return line == 0 ? std::string("record") : "line " + std::to_string(line);
}

[[noreturn]] void fail(std::size_t line, const std::string& field, const std::string& what) {
  throw CorpusError(describe(line) + ": " + field + ": " + what, line, field);
}

json parse_object(std::string_view line, std::size_t line_number) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw CorpusError(describe(line_number) + ": invalid JSON: " + e.what(), line_number, "");
  }
  if (!j.is_object()) fail(line_number, "<root>", "expected a JSON object");
  return j;
}

const json& require(const json& j, const char* field, std::size_t line) {
  auto it = j.find(field);
  if (it == j.end()) fail(line, field, "missing");
  return *it;
}

std::string get_string(const json& j, const char* field, std::size_t line) {
  const json& v = require(j, field, line);
  if (!v.is_string()) fail(line, field, "expected a string");
  return v.get<std::string>();
}

int get_int(const json& j, const char* field, std::size_t line) {
  const json& v = require(j, field, line);
  if (!v.is_number_integer()) fail(line, field, "expected an integer");
  return v.get<int>();
}

std::vector<std::string> get_strings(const json& j, const char* field, std::size_t line) {
  const json& v = require(j, field, line);
  if (!v.is_array()) fail(line, field, "expected an array of strings");
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string()) fail(line, field, "expected an array of strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

template <typename Enum, typename Parser>
Enum get_enum(const json& j, const char* field, std::size_t line, Parser parse) {
  const std::string s = get_string(j, field, line);
  auto v = parse(s);
  if (!v) fail(line, field, "unknown value \"" + s + "\"");
  return *v;
}

std::array<std::string, 3> get_three(const json& j, const char* field, std::size_t line) {
  auto v = get_strings(j, field, line);
  if (v.size() != 3) {
    fail(line, field, "expected exactly 3 entries, got " + std::to_string(v.size()));
  }
  return {v[0], v[1], v[2]};
}

void validate_at(const DeerRecord& r, std::size_t line) {
  if (text::trim(r.id).empty()) fail(line, "id", "must not be empty");
  if (text::trim(r.rule_text).empty()) fail(line, "rule_text", "must not be empty");
  if (!templates::conforms_to(r.rule_text, templates::template_for(r.rule_type))) {
    fail(line, "rule_text",
         "does not match the " + std::string(colm::to_string(r.rule_type)) + " template");
  }
  for (const auto& f : r.long_facts) {
    if (text::trim(f).empty()) fail(line, "long_facts", "facts must not be empty");
  }
  for (const auto& f : r.short_facts) {
    if (text::trim(f).empty()) fail(line, "short_facts", "facts must not be empty");
  }
}

void validate_at(const DeerletRecord& r, std::size_t line) {
  if (text::trim(r.id).empty()) fail(line, "id", "must not be empty");
  if (text::trim(r.deer_id).empty()) fail(line, "deer_id", "must not be empty");
  if (r.facts.empty()) fail(line, "facts", "must contain at least one fact");
  if (text::trim(r.rule_text).empty()) fail(line, "rule_text", "must not be empty");
  if (auto field = r.labels.invalid_field(); !field.empty()) {
    fail(line, field, "out of range");
  }
}

template <typename Record, typename Parser>
std::vector<Record> read_lines(std::istream& in, Parser parse) {
  std::vector<Record> records;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (text::trim(line).empty()) continue;
    records.push_back(parse(line, number));
  }
  return records;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open " + path.string(), 0, "");
  return in;
}

}  // namespace

CorpusError::CorpusError(std::string message, std::size_t line, std::string field)
    : Error(std::move(message)), line_(line), field_(std::move(field)) {}

std::string_view to_string(Topic v) { return kTopicNames[static_cast<std::size_t>(v)]; }
std::string_view to_string(Specificity v) { return kSpecificityNames[static_cast<std::size_t>(v)]; }
std::string_view to_string(DeerSplit v) { return kDeerSplitNames[static_cast<std::size_t>(v)]; }
std::string_view to_string(DeerletSplit v) {
  return kDeerletSplitNames[static_cast<std::size_t>(v)];
}
std::string_view to_string(FactVariant v) { return kVariantNames[static_cast<std::size_t>(v)]; }

std::optional<Topic> parse_topic(std::string_view s) { return parse_enum<Topic>(kTopicNames, s); }
std::optional<Specificity> parse_specificity(std::string_view s) {
  return parse_enum<Specificity>(kSpecificityNames, s);
}
std::optional<DeerSplit> parse_deer_split(std::string_view s) {
  return parse_enum<DeerSplit>(kDeerSplitNames, s);
}
std::optional<DeerletSplit> parse_deerlet_split(std::string_view s) {
  return parse_enum<DeerletSplit>(kDeerletSplitNames, s);
}
std::optional<FactVariant> parse_fact_variant(std::string_view s) {
  return parse_enum<FactVariant>(kVariantNames, s);
}

DeerRecord parse_deer_line(std::string_view line, std::size_t n) {
  const json j = parse_object(line, n);
  DeerRecord r;
  r.id = get_string(j, "id", n);
  r.topic = get_enum<Topic>(j, "topic", n, parse_topic);
  r.rule_type = get_enum<RuleType>(j, "rule_type", n, colm::parse_rule_type);
  r.rule_text = get_string(j, "rule_text", n);
  r.long_facts = get_three(j, "long_facts", n);
  r.short_facts = get_three(j, "short_facts", n);
  r.fact_specificity = get_enum<Specificity>(j, "fact_specificity", n, parse_specificity);
  r.split = get_enum<DeerSplit>(j, "split", n, parse_deer_split);
  validate_at(r, n);
  return r;
}

DeerletRecord parse_deerlet_line(std::string_view line, std::size_t n) {
  const json j = parse_object(line, n);
  DeerletRecord r;
  r.id = get_string(j, "id", n);
  r.deer_id = get_string(j, "deer_id", n);
  r.facts = get_strings(j, "facts", n);
  r.rule_text = get_string(j, "rule_text", n);
  r.labels.consistent = get_int(j, "label_consistent", n);
  r.labels.reality = get_int(j, "label_reality", n);
  r.labels.general = get_int(j, "label_general", n);
  r.labels.nontrivial = get_int(j, "label_nontrivial", n);
  r.split = get_enum<DeerletSplit>(j, "split", n, parse_deerlet_split);
  validate_at(r, n);
  return r;
}

std::string to_json_line(const DeerRecord& r) {
  ordered_json j;
  j["id"] = r.id;
  j["topic"] = to_string(r.topic);
  j["rule_type"] = colm::to_string(r.rule_type);
  j["rule_text"] = r.rule_text;
  j["long_facts"] = r.long_facts;
  j["short_facts"] = r.short_facts;
  j["fact_specificity"] = to_string(r.fact_specificity);
  j["split"] = to_string(r.split);
  return j.dump();
}

std::string to_json_line(const DeerletRecord& r) {
  ordered_json j;
  j["id"] = r.id;
  j["deer_id"] = r.deer_id;
  j["facts"] = r.facts;
  j["rule_text"] = r.rule_text;
  j["label_consistent"] = r.labels.consistent;
  j["label_reality"] = r.labels.reality;
  j["label_general"] = r.labels.general;
  j["label_nontrivial"] = r.labels.nontrivial;
  j["split"] = to_string(r.split);
  return j.dump();
}

void validate(const DeerRecord& record) { validate_at(record, 0); }
void validate(const DeerletRecord& record) { validate_at(record, 0); }

std::vector<DeerRecord> read_deer(std::istream& in) {
  return read_lines<DeerRecord>(in, parse_deer_line);
}

std::vector<DeerletRecord> read_deerlet(std::istream& in) {
  return read_lines<DeerletRecord>(in, parse_deerlet_line);
}

std::vector<DeerRecord> load_deer(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_deer(in);
}

std::vector<DeerletRecord> load_deerlet(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_deerlet(in);
}

void write_deer(std::ostream& out, std::span<const DeerRecord> records) {
  for (const auto& r : records) out << to_json_line(r) << '\n';
}

void write_deerlet(std::ostream& out, std::span<const DeerletRecord> records) {
  for (const auto& r : records) out << to_json_line(r) << '\n';
}

SplitCounts split_counts(std::span<const DeerletRecord> records) {
  SplitCounts c;
  for (const auto& r : records) {
    switch (r.split) {
      case DeerletSplit::kTrain: ++c.train; break;
      case DeerletSplit::kVal: ++c.val; break;
      case DeerletSplit::kTest: ++c.test; break;
    }
  }
  return c;
}

std::string keep_half(std::string_view fact, bool drop_former) {
  const auto sentences = text::split_sentences(fact);
  if (sentences.size() >= 2) {
    const std::size_t former = (sentences.size() + 1) / 2;
    std::vector<std::string> kept;
    if (drop_former) {
      kept.assign(sentences.begin() + static_cast<std::ptrdiff_t>(former), sentences.end());
    } else {
      kept.assign(sentences.begin(), sentences.begin() + static_cast<std::ptrdiff_t>(former));
    }
    return text::join(kept, " ");
  }
  const auto words = text::split_whitespace(fact);
  if (words.size() <= 1) return text::trim(fact);
  const std::size_t former = (words.size() + 1) / 2;
  std::vector<std::string> kept;
  if (drop_former) {
    kept.assign(words.begin() + static_cast<std::ptrdiff_t>(former), words.end());
  } else {
    kept.assign(words.begin(), words.begin() + static_cast<std::ptrdiff_t>(former));
  }
  return text::join(kept, " ");
}

FactInput make_fact_variant(const DeerRecord& record, FactVariant variant, std::uint64_t seed) {
  FactInput in;
  in.variant = variant;
  in.seed = seed;
  switch (variant) {
    case FactVariant::kLong1:
      in.texts = {record.long_facts[0]};
      break;
    case FactVariant::kShort1:
      in.texts = {record.short_facts[0]};
      break;
    case FactVariant::kShort2:
      in.texts = {record.short_facts[0], record.short_facts[1]};
      break;
    case FactVariant::kShort3:
      in.texts.assign(record.short_facts.begin(), record.short_facts.end());
      break;
    case FactVariant::kShort3Missing: {
      StableRng rng(seed);
      for (const auto& fact : record.short_facts) in.texts.push_back(keep_half(fact, rng.coin()));
      break;
    }
  }
  return in;
}

}  // namespace colm::corpus
