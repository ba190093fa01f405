#include "colm/module_id.hpp"

namespace colm {

std::string_view to_string(ModuleId id) {
  static constexpr std::string_view kNames[] = {"M1", "M2", "M3", "M4", "M5"};
  return kNames[static_cast<std::size_t>(id)];
}

std::optional<ModuleId> parse_module_id(std::string_view name) {
  for (auto id : {ModuleId::kM1, ModuleId::kM2, ModuleId::kM3, ModuleId::kM4, ModuleId::kM5}) {
    if (to_string(id) == name) return id;
  }
  return std::nullopt;
}

}  // namespace colm
