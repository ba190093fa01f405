#include "colm/http_backend.hpp"

#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace colm::backend {
namespace {

using nlohmann::json;

std::map<std::string, double> first_token_alternatives(const json& logprobs) {
  std::map<std::string, double> out;
  if (!logprobs.is_object()) return out;
  if (auto top = logprobs.find("top_logprobs"); top != logprobs.end() && top->is_array() &&
                                                 !top->empty() && top->at(0).is_object()) {
    for (const auto& [token, lp] : top->at(0).items()) out[token] = lp.get<double>();
    return out;
  }
  if (auto content = logprobs.find("content"); content != logprobs.end() && content->is_array() &&
                                               !content->empty()) {
    const json& first = content->at(0);
    for (const auto& alt : first.value("top_logprobs", json::array())) {
      out[alt.at("token").get<std::string>()] = alt.at("logprob").get<double>();
    }
  }
  return out;
}

}  // namespace

std::string encode_completion_request(const CompletionRequest& request,
                                      const std::string& model_name) {
  json body;
  if (!model_name.empty()) body["model"] = model_name;
  body["prompt"] = request.prompt;
  body["max_tokens"] = request.max_new_tokens;
  body["temperature"] = request.temperature;
  body["stop"] = request.stop_sequences;
  if (request.want_logprobs) body["logprobs"] = request.top_logprob_count;
  if (request.seed) body["seed"] = *request.seed;
  return body.dump();
}

CompletionResponse decode_completion_response(const std::string& body,
                                              const CompletionRequest& request) {
  CompletionResponse resp;
  try {
    const json j = json::parse(body);
    const json& choices = j.at("choices");
    if (!choices.is_array() || choices.empty()) {
      throw BackendError(ErrorKind::kProtocol, "response has no choices");
    }
    const json& choice = choices.at(0);
    resp.text = apply_stop_sequences(choice.value("text", std::string{}), request.stop_sequences);
    if (request.want_logprobs) {
      resp.first_token_logprobs = first_token_alternatives(choice.value("logprobs", json{}));
      if (resp.first_token_logprobs.empty()) {
        throw BackendError(ErrorKind::kProtocol, "response carries no first-token logprobs");
      }
      for (const auto& [token, lp] : resp.first_token_logprobs) {
        if (lp > 0.0) throw BackendError(ErrorKind::kProtocol, "positive logprob for " + token);
      }
    }
    if (auto usage = j.find("usage"); usage != j.end() && usage->is_object()) {
      resp.token_count_of_prompt = usage->value("prompt_tokens", 0);
    }
  } catch (const json::exception& e) {
    throw BackendError(ErrorKind::kProtocol, std::string("malformed completion response: ") + e.what());
  }
  return resp;
}

HttpBackend::HttpBackend(HttpBackendConfig config, Sleeper sleeper)
    : config_(std::move(config)), sleeper_(std::move(sleeper)) {
  if (config_.base_url.empty()) {
    throw BackendError(ErrorKind::kInvalidRequest, "http backend needs a base_url");
  }
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::string HttpBackend::post_once(const std::string& path, const std::string& body) const {
  httplib::Client client(config_.base_url);
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::duration<double>(config_.timeout_s));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  httplib::Headers headers;
  if (!config_.api_key_env_var.empty()) {
    if (const char* key = std::getenv(config_.api_key_env_var.c_str()); key != nullptr) {
      headers.emplace(config_.auth_header,
                      config_.auth_header == "Authorization" ? std::string("Bearer ") + key : key);
    }
  }

  auto res = client.Post(path, headers, body, "application/json");
  if (!res) {
    const auto err = res.error();
    const bool timed_out = err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
                           err == httplib::Error::Write;
    throw BackendError(timed_out ? ErrorKind::kTimeout : ErrorKind::kNetwork,
                       "POST " + config_.base_url + path + " failed: " + httplib::to_string(err));
  }
  if (res->status != 200) {
    throw BackendError(ErrorKind::kProtocol, "POST " + config_.base_url + path + " returned HTTP " +
                                                 std::to_string(res->status));
  }
  return res->body;
}

std::string HttpBackend::post_json(const std::string& path, const std::string& body) const {
  for (std::size_t attempt = 0;; ++attempt) {
    try {
      return post_once(path, body);
    } catch (const BackendError& e) {
      if (!e.retryable() || attempt >= config_.retry_delays_s.size()) throw;
      sleeper_(std::chrono::milliseconds(
          static_cast<long>(config_.retry_delays_s[attempt] * 1000.0)));
    }
  }
}

CompletionResponse HttpBackend::complete(const CompletionRequest& request) const {
  request.validate();
  const std::string body = post_json(config_.completion_path,
                                     encode_completion_request(request, config_.model_name));
  return decode_completion_response(body, request);
}

std::optional<std::size_t> HttpBackend::backend_token_count(std::string_view text) const {
  if (config_.tokenize_path.empty()) return std::nullopt;
  json req;
  req["content"] = std::string(text);
  if (!config_.model_name.empty()) req["model"] = config_.model_name;
  const std::string body = post_json(config_.tokenize_path, req.dump());
  try {
    const json j = json::parse(body);
    return j.at("tokens").size();
  } catch (const json::exception& e) {
    throw BackendError(ErrorKind::kProtocol, std::string("malformed tokenize response: ") + e.what());
  }
}

}  // namespace colm::backend
