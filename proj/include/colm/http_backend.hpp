#pragma once

#include <chrono>
#include <functional>
#include <string>
#include <vector>

#include "colm/backend.hpp"

namespace colm::backend {

struct HttpBackendConfig {
  std::string base_url;                          // e.g. "http://localhost:8080"
  std::string completion_path = "/v1/completions";
  std::string tokenize_path;                     // empty: no backend tokenizer
  std::string api_key_env_var;                   // empty: no auth header
  std::string auth_header = "Authorization";
  std::string model_name;
  double timeout_s = 60.0;
  int max_parallel = 4;
  // Delays before each retry of a network or timeout failure.
  std::vector<double> retry_delays_s = {0.5, 2.0, 8.0};
};

// Wire encoding of a completion request:
// {model, prompt, max_tokens, temperature, stop, logprobs?, seed?}.
std::string encode_completion_request(const CompletionRequest& request,
                                      const std::string& model_name);

// Decodes {choices: [{text, logprobs: {top_logprobs: [{tok: lp}, ...]}}],
// usage: {prompt_tokens}}. Also accepts logprobs.content[0].top_logprobs as a
// list of {token, logprob}. Stop sequences are re-applied client side.
CompletionResponse decode_completion_response(const std::string& body,
                                              const CompletionRequest& request);

// Client for an HTTP completion server. Each call opens its own connection,
// so one instance may be shared between threads.
class HttpBackend : public CompletionBackend {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit HttpBackend(HttpBackendConfig config, Sleeper sleeper = {});

  CompletionResponse complete(const CompletionRequest& request) const override;
  std::optional<std::size_t> backend_token_count(std::string_view text) const override;

  const HttpBackendConfig& config() const { return config_; }

 private:
  std::string post_json(const std::string& path, const std::string& body) const;
  std::string post_once(const std::string& path, const std::string& body) const;

  HttpBackendConfig config_;
  Sleeper sleeper_;
};

}  // namespace colm::backend
