#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "colm/error.hpp"
#include "colm/metrics.hpp"
#include "colm/templates.hpp"

namespace colm::corpus {

// Raised for malformed dataset lines. `line` is 1-based (0 when the error is
// not tied to a line) and `field` names the offending field when known.
class CorpusError : public Error {
 public:
  CorpusError(std::string message, std::size_t line, std::string field);

  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

enum class Topic { kZoology, kBotany, kGeology, kAstronomy, kHistory, kPhysics };
enum class Specificity { kSpecific, kGeneral };
enum class DeerSplit { kTrain, kTest };
enum class DeerletSplit { kTrain, kVal, kTest };
enum class FactVariant { kLong1, kShort1, kShort2, kShort3, kShort3Missing };

inline constexpr Topic kAllTopics[] = {Topic::kZoology,   Topic::kBotany,  Topic::kGeology,
                                       Topic::kAstronomy, Topic::kHistory, Topic::kPhysics};

std::string_view to_string(Topic v);
std::string_view to_string(Specificity v);
std::string_view to_string(DeerSplit v);
std::string_view to_string(DeerletSplit v);
std::string_view to_string(FactVariant v);

std::optional<Topic> parse_topic(std::string_view s);
std::optional<Specificity> parse_specificity(std::string_view s);
std::optional<DeerSplit> parse_deer_split(std::string_view s);
std::optional<DeerletSplit> parse_deerlet_split(std::string_view s);
std::optional<FactVariant> parse_fact_variant(std::string_view s);

// One gold rule with its six supporting facts.
struct DeerRecord {
  std::string id;
  Topic topic = Topic::kZoology;
  RuleType rule_type = RuleType::kUnivImpl;
  std::string rule_text;
  std::array<std::string, 3> long_facts;   // paragraphs
  std::array<std::string, 3> short_facts;  // core sentences
  Specificity fact_specificity = Specificity::kSpecific;
  DeerSplit split = DeerSplit::kTest;

  bool operator==(const DeerRecord&) const = default;
};

// A generated rule with its four aspect labels.
struct DeerletRecord {
  std::string id;
  std::string deer_id;
  std::vector<std::string> facts;
  std::string rule_text;
  metrics::HumanLabels labels;
  DeerletSplit split = DeerletSplit::kTrain;

  bool operator==(const DeerletRecord& o) const {
    return id == o.id && deer_id == o.deer_id && facts == o.facts && rule_text == o.rule_text &&
           labels.consistent == o.labels.consistent && labels.reality == o.labels.reality &&
           labels.general == o.labels.general && labels.nontrivial == o.labels.nontrivial &&
           split == o.split;
  }
};

struct FactInput {
  std::vector<std::string> texts;
  FactVariant variant = FactVariant::kShort3;
  std::uint64_t seed = 0;

  bool operator==(const FactInput&) const = default;
};

struct SplitCounts {
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;

  bool operator==(const SplitCounts&) const = default;
};

// Single-line parsing and serialization. Parse functions validate every
// invariant and throw CorpusError with `line_number` attached.
DeerRecord parse_deer_line(std::string_view line, std::size_t line_number = 0);
DeerletRecord parse_deerlet_line(std::string_view line, std::size_t line_number = 0);
std::string to_json_line(const DeerRecord& record);
std::string to_json_line(const DeerletRecord& record);

// Throws CorpusError naming the first violated field.
void validate(const DeerRecord& record);
void validate(const DeerletRecord& record);

// JSON Lines readers; blank lines are skipped and order is preserved.
std::vector<DeerRecord> read_deer(std::istream& in);
std::vector<DeerletRecord> read_deerlet(std::istream& in);
std::vector<DeerRecord> load_deer(const std::filesystem::path& path);
std::vector<DeerletRecord> load_deerlet(const std::filesystem::path& path);

void write_deer(std::ostream& out, std::span<const DeerRecord> records);
void write_deerlet(std::ostream& out, std::span<const DeerletRecord> records);

SplitCounts split_counts(std::span<const DeerletRecord> records);

// Keeps one half of a fact. With two or more sentences the former half is
// the first ceil(s/2) sentences; a single sentence is cut at its word
// midpoint instead (first ceil(w/2) words). One-word facts are returned
// unchanged.
std::string keep_half(std::string_view fact, bool drop_former);

// Builds the fact input for one of the analysis variants. For the
// missing-fact variant every short fact independently (seeded) loses its
// former or latter half.
FactInput make_fact_variant(const DeerRecord& record, FactVariant variant, std::uint64_t seed);

}  // namespace colm::corpus
