#include "colm/backend.hpp"

#include <cmath>

#include "colm/tokenize.hpp"

namespace colm::backend {

void CompletionRequest::validate() const {
  if (max_new_tokens < 1) {
    throw BackendError(ErrorKind::kInvalidRequest, "max_new_tokens must be at least 1");
  }
  if (!(temperature >= 0.0)) {
    throw BackendError(ErrorKind::kInvalidRequest, "temperature must be nonnegative");
  }
  if (want_logprobs && top_logprob_count < 2) {
    throw BackendError(ErrorKind::kInvalidRequest, "top_logprob_count must be at least 2");
  }
}

std::optional<std::size_t> CompletionBackend::backend_token_count(std::string_view) const {
  return std::nullopt;
}

TokenCount CompletionBackend::count_tokens(std::string_view text) const {
  if (auto n = backend_token_count(text)) return {*n, false};
  return {metrics::tokenize(text).size(), true};
}

YesNoScore yes_no_from_logprobs(const std::map<std::string, double>& logprobs) {
  YesNoScore s;
  bool found = false;
  const auto accumulate = [&](std::string_view variant, double& into) {
    auto it = logprobs.find(std::string(variant));
    if (it == logprobs.end()) return;
    found = true;
    into += std::exp(it->second);
  };
  for (auto v : kYesVariants) accumulate(v, s.p_yes);
  for (auto v : kNoVariants) accumulate(v, s.p_no);
  if (!found || s.p_yes + s.p_no <= 0.0) {
    throw BackendError(ErrorKind::kMissingToken,
                       "no yes/no token among the first-token alternatives");
  }
  s.value = s.p_yes / (s.p_yes + s.p_no);
  return s;
}

YesNoScore yes_no_score(const CompletionBackend& backend, const std::string& prompt,
                        int top_logprob_count) {
  CompletionRequest req;
  req.prompt = prompt;
  req.max_new_tokens = 1;
  req.temperature = 0.0;
  req.want_logprobs = true;
  req.top_logprob_count = top_logprob_count;
  req.validate();
  return yes_no_from_logprobs(backend.complete(req).first_token_logprobs);
}

std::string apply_stop_sequences(std::string text, const std::vector<std::string>& stops) {
  std::size_t cut = text.size();
  for (const auto& stop : stops) {
    if (stop.empty()) continue;
    cut = std::min(cut, text.find(stop));
  }
  text.resize(cut);
  return text;
}

}  // namespace colm::backend
