#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "colm/backend.hpp"

namespace colm::backend {

// A scripted reply. The entry applies when every string in `contains`
// occurs in the prompt; the first applicable entry wins.
struct ScriptEntry {
  std::vector<std::string> contains;
  // Candidate continuations, picked by request seed modulo size. Empty means
  // the hashed fallback text.
  std::vector<std::string> completions;
  // First-token alternatives. When empty and p_yes is set, the pair
  // {" yes": ln p_yes, " no": ln(1 - p_yes)} is used; when both are empty the
  // hashed fallback distribution is used.
  std::map<std::string, double> logprobs;
  std::optional<double> p_yes;
};

// Deterministic offline backend: a pure function of (prompt, script, seed,
// request seed). Unscripted prompts get a hashed fallback: a word salad
// drawn from the prompt's final block followed by a blank-line run-on, and
// a yes/no pair whose probabilities sum to one.
class MockBackend : public CompletionBackend {
 public:
  explicit MockBackend(std::vector<ScriptEntry> script = {}, std::uint64_t seed = 0);

  // Reads {"seed": n, "entries": [...]} with entries shaped like ScriptEntry.
  static MockBackend from_file(const std::filesystem::path& path,
                               std::optional<std::uint64_t> seed_override = std::nullopt);

  CompletionResponse complete(const CompletionRequest& request) const override;

  const std::vector<ScriptEntry>& script() const { return script_; }

 private:
  const ScriptEntry* find_entry(const std::string& prompt) const;
  std::string fallback_text(const CompletionRequest& request, std::uint64_t h) const;

  std::vector<ScriptEntry> script_;
  std::uint64_t seed_;
};

}  // namespace colm::backend
