#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "colm/error.hpp"

namespace colm::backend {

enum class ErrorKind {
  kNetwork,       // connection failed; retryable
  kTimeout,       // request timed out; retryable
  kProtocol,      // bad status or malformed payload; not retryable
  kMissingToken,  // neither yes nor no among the returned logprobs
  kInvalidRequest,
};

class BackendError : public Error {
 public:
  BackendError(ErrorKind kind, const std::string& message) : Error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }
  bool retryable() const { return kind_ == ErrorKind::kNetwork || kind_ == ErrorKind::kTimeout; }

 private:
  ErrorKind kind_;
};

struct CompletionRequest {
  std::string prompt;
  int max_new_tokens = 96;
  double temperature = 0.0;
  std::vector<std::string> stop_sequences;
  bool want_logprobs = false;
  int top_logprob_count = 5;
  // Sampling seed forwarded to the backend; distinct candidates for the same
  // prompt use distinct seeds.
  std::optional<std::uint64_t> seed;

  // Throws BackendError(kInvalidRequest) when max_new_tokens < 1,
  // temperature < 0, or logprobs are wanted with fewer than 2 alternatives.
  void validate() const;
};

struct CompletionResponse {
  std::string text;
  // Top alternatives for the first generated token, as natural logs.
  std::map<std::string, double> first_token_logprobs;
  int token_count_of_prompt = 0;
};

struct TokenCount {
  std::size_t count = 0;
  // True when the backend has no tokenizer and metrics::tokenize was used.
  bool used_fallback = true;
};

struct YesNoScore {
  double value = 0.5;  // p_yes / (p_yes + p_no)
  double p_yes = 0.0;
  double p_no = 0.0;
};

// A text-completion service. Implementations must be safe to call from
// several threads at once.
class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;

  virtual CompletionResponse complete(const CompletionRequest& request) const = 0;

  // Token count from the backend's own tokenizer, if it exposes one.
  virtual std::optional<std::size_t> backend_token_count(std::string_view text) const;

  TokenCount count_tokens(std::string_view text) const;
};

inline constexpr std::string_view kYesVariants[] = {"yes", "Yes", " yes", " Yes"};
inline constexpr std::string_view kNoVariants[] = {"no", "No", " no", " No"};

// Sums exp(logprob) over the yes and no surface variants present in the map.
// Throws BackendError(kMissingToken) when neither appears.
YesNoScore yes_no_from_logprobs(const std::map<std::string, double>& logprobs);

// Requests a one-token completion with first-token logprobs and scores it.
YesNoScore yes_no_score(const CompletionBackend& backend, const std::string& prompt,
                        int top_logprob_count = 5);

// Cuts `text` at the earliest occurrence of any stop sequence.
std::string apply_stop_sequences(std::string text, const std::vector<std::string>& stops);

}  // namespace colm::backend
