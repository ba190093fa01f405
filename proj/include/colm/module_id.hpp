#pragma once

#include <optional>
#include <string_view>

namespace colm {

// M1 proposes rules; M2..M5 verify them (deductive consistency,
// indiscriminate confirmation, generalization, triviality).
enum class ModuleId { kM1, kM2, kM3, kM4, kM5 };

inline constexpr ModuleId kVerifierModules[] = {ModuleId::kM2, ModuleId::kM3, ModuleId::kM4,
                                                ModuleId::kM5};

std::string_view to_string(ModuleId id);
std::optional<ModuleId> parse_module_id(std::string_view name);

inline bool is_verifier(ModuleId id) { return id != ModuleId::kM1; }

// Verifiers whose prompts carry no facts.
inline bool is_fact_independent(ModuleId id) {
  return id == ModuleId::kM3 || id == ModuleId::kM5;
}

}  // namespace colm
