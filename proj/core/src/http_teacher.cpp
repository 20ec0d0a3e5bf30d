#include "distillplan/http_teacher.hpp"

#include <chrono>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "distillplan/errors.hpp"

namespace distill {

namespace {

bool retryable_status(int status) {
  return status == 429 || (status >= 500 && status < 600);
}

}  // namespace

HttpTeacherClient::HttpTeacherClient(HttpTeacherConfig config)
    : config_(std::move(config)) {
  if (config_.base_url.empty())
    throw ValidationError("teacher endpoint: empty base_url");
}

int backoff_delay_ms(const HttpTeacherConfig& config, int attempt) {
  long long delay = config.backoff_base_ms;
  for (int i = 0; i < attempt && delay < config.backoff_max_ms; ++i)
    delay *= 2;
  return static_cast<int>(
      std::min<long long>(delay, config.backoff_max_ms));
}

std::string HttpTeacherClient::complete(const std::string& prompt,
                                        const std::string& request_id) {
  nlohmann::json body{
      {"model", config_.model},
      {"messages",
       {{{"role", "system"}, {"content", config_.system_prompt}},
        {{"role", "user"}, {"content", prompt}}}},
      {"temperature", config_.temperature},
      {"max_tokens", config_.max_tokens},
  };
  const std::string payload = body.dump();

  httplib::Client client(config_.base_url);
  client.set_connection_timeout(config_.timeout_s, 0);
  client.set_read_timeout(config_.timeout_s, 0);
  httplib::Headers headers{{"X-Request-Id", request_id}};
  if (!config_.api_key.empty())
    headers.emplace("Authorization", "Bearer " + config_.api_key);

  std::string last_failure = "no attempt made";
  for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
    if (attempt > 0)
      std::this_thread::sleep_for(
          std::chrono::milliseconds(backoff_delay_ms(config_, attempt - 1)));
    auto res = client.Post(config_.path, headers, payload, "application/json");
    if (!res) {
      last_failure = "connection error (" + to_string(res.error()) + ")";
      continue;
    }
    if (retryable_status(res->status)) {
      last_failure = "status " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200)
      throw TransportError("teacher endpoint returned status " +
                           std::to_string(res->status) + " for request '" +
                           request_id + "'");
    nlohmann::json doc = nlohmann::json::parse(res->body, nullptr, false);
    if (doc.is_discarded() || !doc.contains("choices") ||
        !doc["choices"].is_array() || doc["choices"].empty() ||
        !doc["choices"][0].contains("message") ||
        !doc["choices"][0]["message"].contains("content") ||
        !doc["choices"][0]["message"]["content"].is_string())
      throw TransportError("teacher endpoint returned a malformed body for "
                           "request '" +
                           request_id + "'");
    return doc["choices"][0]["message"]["content"].get<std::string>();
  }
  throw TransportError("teacher endpoint unreachable after " +
                       std::to_string(config_.max_attempts) + " attempts: " +
                       last_failure);
}

}  // namespace distill
