#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "colm/error.hpp"

namespace colm {

// The four first-order rule shapes collected in DEER.
enum class RuleType { kUnivImpl, kExistImpl, kConjImpl, kDisjImpl };

inline constexpr RuleType kAllRuleTypes[] = {RuleType::kUnivImpl, RuleType::kExistImpl,
                                             RuleType::kConjImpl, RuleType::kDisjImpl};

std::string_view to_string(RuleType type);
std::optional<RuleType> parse_rule_type(std::string_view name);

namespace templates {

class TemplateError : public Error {
 public:
  using Error::Error;
};

// Natural-language surface of a rule type. Slots are written <A>, <B>, <C>.
struct RuleTemplate {
  RuleType rule_type;
  std::string surface;
  int slot_count;

  // Fixed text around the slots: literals()[i] precedes slot i, and the
  // last element follows the final slot.
  std::vector<std::string> literals() const;
};

RuleTemplate template_for(RuleType type);

// Replaces the slot markers left to right with the trimmed slot texts.
// Throws TemplateError on arity mismatch or a blank slot.
std::string fill(const RuleTemplate& tmpl, const std::vector<std::string>& slots);

// Case-insensitive surface match: the template's fixed words must occur in
// order around non-blank slot spans. Whitespace runs are collapsed and the
// terminal period is optional. Never throws.
bool conforms_to(std::string_view rule_text, const RuleTemplate& tmpl);

}  // namespace templates
}  // namespace colm
