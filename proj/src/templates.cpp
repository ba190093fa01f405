#include "colm/templates.hpp"

#include <array>

#include "colm/text.hpp"

namespace colm {

namespace {

constexpr std::array<std::string_view, 4> kTypeNames = {"UnivImpl", "ExistImpl", "ConjImpl",
                                                        "DisjImpl"};

}  // namespace

std::string_view to_string(RuleType type) { return kTypeNames[static_cast<std::size_t>(type)]; }

std::optional<RuleType> parse_rule_type(std::string_view name) {
  for (std::size_t i = 0; i < kTypeNames.size(); ++i) {
    if (kTypeNames[i] == name) return static_cast<RuleType>(i);
  }
  return std::nullopt;
}

namespace templates {
namespace {

bool is_marker_at(std::string_view s, std::size_t i) {
  return i + 2 < s.size() && s[i] == '<' && s[i + 1] >= 'A' && s[i + 1] <= 'Z' && s[i + 2] == '>';
}

// Case-insensitive search for `needle` in `hay` starting at `from`.
std::size_t find_ci(std::string_view hay, std::string_view needle, std::size_t from) {
  if (needle.size() > hay.size()) return std::string_view::npos;
  for (std::size_t i = from; i + needle.size() <= hay.size(); ++i) {
    if (text::iequals_ascii(hay.substr(i, needle.size()), needle)) return i;
  }
  return std::string_view::npos;
}

bool blank(std::string_view s) { return text::trim(s).empty(); }

// Tries to place slot `slot` starting at `pos`, then the rest of the
// template. Slot ends are tried shortest first.
bool match_from(std::string_view text, const std::vector<std::string>& literals, std::size_t slot,
                std::size_t pos) {
  const std::size_t slots = literals.size() - 1;
  const std::string& next = literals[slot + 1];
  const bool last = slot + 1 == slots;
  if (last && next.empty()) return !blank(text.substr(pos));
  for (std::size_t q = find_ci(text, next, pos + 1); q != std::string_view::npos;
       q = find_ci(text, next, q + 1)) {
    if (blank(text.substr(pos, q - pos))) continue;
    const std::size_t after = q + next.size();
    if (last) {
      if (after == text.size()) return true;
      continue;
    }
    if (match_from(text, literals, slot + 1, after)) return true;
  }
  return false;
}

}  // namespace

std::vector<std::string> RuleTemplate::literals() const {
  std::vector<std::string> out(1);
  for (std::size_t i = 0; i < surface.size(); ++i) {
    if (is_marker_at(surface, i)) {
      out.emplace_back();
      i += 2;
    } else {
      out.back().push_back(surface[i]);
    }
  }
  return out;
}

RuleTemplate template_for(RuleType type) {
  switch (type) {
    case RuleType::kUnivImpl:
      return {type, "If <A>, then <B>.", 2};
    case RuleType::kExistImpl:
      return {type, "There exists <A>, which <B>.", 2};
    case RuleType::kConjImpl:
      return {type, "If <A> and <B>, then <C>.", 3};
    case RuleType::kDisjImpl:
      return {type, "If <A> or <B>, then <C>.", 3};
  }
  throw TemplateError("unknown rule type");
}

std::string fill(const RuleTemplate& tmpl, const std::vector<std::string>& slots) {
  if (static_cast<int>(slots.size()) != tmpl.slot_count) {
    throw TemplateError("template " + std::string(to_string(tmpl.rule_type)) + " takes " +
                        std::to_string(tmpl.slot_count) + " slots, got " +
                        std::to_string(slots.size()));
  }
  const auto literals = tmpl.literals();
  std::string out = literals[0];
  for (std::size_t i = 0; i < slots.size(); ++i) {
    std::string slot = text::trim(slots[i]);
    if (slot.empty()) throw TemplateError("slot " + std::to_string(i) + " is empty");
    out += slot;
    out += literals[i + 1];
  }
  return out;
}

bool conforms_to(std::string_view rule_text, const RuleTemplate& tmpl) {
  std::string text = text::collapse_whitespace(rule_text);
  auto literals = tmpl.literals();
  if (literals.size() < 3) return false;
  if (!literals.back().empty() && literals.back().back() == '.') literals.back().pop_back();
  if (!text.empty() && text.back() == '.') text.pop_back();

  const std::string& head = literals.front();
  if (text.size() < head.size() || !text::iequals_ascii(std::string_view(text).substr(0, head.size()), head)) {
    return false;
  }
  return match_from(text, literals, 0, head.size());
}

}  // namespace templates
}  // namespace colm
