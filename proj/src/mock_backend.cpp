#include "colm/mock_backend.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "colm/random.hpp"
#include "colm/text.hpp"
#include "colm/tokenize.hpp"

namespace colm::backend {
namespace {

using nlohmann::json;

// Words of the last blank-line-separated block of the prompt, stripped of
// surrounding punctuation.
std::vector<std::string> query_words(const std::string& prompt) {
  std::string_view block = prompt;
  const auto trimmed_end = prompt.find_last_not_of(" \n\t");
  if (trimmed_end != std::string::npos) {
    const auto cut = prompt.rfind("\n\n", trimmed_end);
    if (cut != std::string::npos) block = std::string_view(prompt).substr(cut + 2);
  }
  std::vector<std::string> words;
  for (auto& w : text::split_whitespace(block)) {
    std::size_t b = 0, e = w.size();
    while (b < e && !std::isalnum(static_cast<unsigned char>(w[b]))) ++b;
    while (e > b && !std::isalnum(static_cast<unsigned char>(w[e - 1]))) --e;
    if (e > b) words.push_back(text::ascii_lower(w.substr(b, e - b)));
  }
  if (words.empty()) words = {"something", "happens"};
  return words;
}

std::string limit_words(const std::string& s, int max_words) {
  // Whitespace-delimited words stand in for tokens here; the rest of the
  // text (including line breaks inside the limit) is kept verbatim.
  int seen = 0;
  bool in_word = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const bool space = std::isspace(static_cast<unsigned char>(s[i])) != 0;
    if (!space && !in_word) {
      if (seen == max_words) return text::trim(s.substr(0, i));
      ++seen;
    }
    in_word = !space;
  }
  return s;
}

}  // namespace

MockBackend::MockBackend(std::vector<ScriptEntry> script, std::uint64_t seed)
    : script_(std::move(script)), seed_(seed) {}

MockBackend MockBackend::from_file(const std::filesystem::path& path,
                                   std::optional<std::uint64_t> seed_override) {
  std::ifstream in(path);
  if (!in) throw BackendError(ErrorKind::kInvalidRequest, "cannot open mock script " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw BackendError(ErrorKind::kInvalidRequest,
                       "mock script " + path.string() + ": " + e.what());
  }
  std::vector<ScriptEntry> entries;
  try {
    for (const auto& e : j.value("entries", json::array())) {
      ScriptEntry entry;
      entry.contains = e.value("contains", std::vector<std::string>{});
      entry.completions = e.value("completions", std::vector<std::string>{});
      entry.logprobs = e.value("logprobs", std::map<std::string, double>{});
      if (e.contains("p_yes")) entry.p_yes = e.at("p_yes").get<double>();
      entries.push_back(std::move(entry));
    }
  } catch (const json::exception& e) {
    throw BackendError(ErrorKind::kInvalidRequest,
                       "mock script " + path.string() + ": " + e.what());
  }
  const std::uint64_t seed = seed_override.value_or(j.value("seed", std::uint64_t{0}));
  return MockBackend(std::move(entries), seed);
}

const ScriptEntry* MockBackend::find_entry(const std::string& prompt) const {
  for (const auto& e : script_) {
    bool all = true;
    for (const auto& needle : e.contains) {
      if (prompt.find(needle) == std::string::npos) {
        all = false;
        break;
      }
    }
    if (all) return &e;
  }
  return nullptr;
}

std::string MockBackend::fallback_text(const CompletionRequest& request, std::uint64_t h) const {
  const auto words = query_words(request.prompt);
  StableRng rng(h);
  const std::size_t length = 8 + rng.index(70);
  std::string out;
  for (std::size_t i = 0; i < length; ++i) {
    if (i > 0) out.push_back(' ');
    out += words[rng.index(words.size())];
  }
  if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  out += ".\n\n";
  out += words[rng.index(words.size())];
  return out;
}

CompletionResponse MockBackend::complete(const CompletionRequest& request) const {
  request.validate();
  const std::uint64_t request_seed = request.seed.value_or(0);
  const std::uint64_t h = stable_hash(request.prompt, seed_ ^ mix64(request_seed));
  const ScriptEntry* entry = find_entry(request.prompt);

  CompletionResponse resp;
  resp.token_count_of_prompt = static_cast<int>(metrics::tokenize(request.prompt).size());

  std::string text;
  if (entry != nullptr && !entry->completions.empty()) {
    text = entry->completions[request_seed % entry->completions.size()];
  } else {
    text = fallback_text(request, h);
  }
  resp.text = limit_words(backend::apply_stop_sequences(std::move(text), request.stop_sequences),
                          request.max_new_tokens);

  if (request.want_logprobs) {
    if (entry != nullptr && !entry->logprobs.empty()) {
      resp.first_token_logprobs = entry->logprobs;
    } else {
      double p = 0.0;
      if (entry != nullptr && entry->p_yes) {
        p = std::clamp(*entry->p_yes, 0.0, 1.0);
      } else {
        StableRng rng(mix64(h));
        p = 0.02 + 0.96 * rng.unit();
      }
      if (p > 0.0) resp.first_token_logprobs[" yes"] = std::log(p);
      if (p < 1.0) resp.first_token_logprobs[" no"] = std::log1p(-p);
    }
  }
  return resp;
}

}  // namespace colm::backend
