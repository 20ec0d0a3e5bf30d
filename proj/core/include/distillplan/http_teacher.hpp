#pragma once

#include <string>

#include "distillplan/teacher_client.hpp"

// Chat-completion client for a live teacher endpoint. POSTs
// {model, messages, temperature, max_tokens} to base_url + path and
// returns choices[0].message.content. 429 and 5xx responses and
// connection failures are retried with capped exponential backoff; a
// spent budget surfaces as TransportError.

namespace distill {

struct HttpTeacherConfig {
  std::string base_url;  // e.g. "http://teacher.internal:8000"
  std::string path = "/v1/chat/completions";
  std::string api_key;   // sent as a bearer token when non-empty
  std::string model;
  std::string system_prompt = "You are a careful reasoning assistant.";
  double temperature = 0.0;
  int max_tokens = 1024;
  int max_attempts = 4;
  int backoff_base_ms = 200;
  int backoff_max_ms = 5000;
  int timeout_s = 120;
};

class HttpTeacherClient : public TeacherClient {
 public:
  explicit HttpTeacherClient(HttpTeacherConfig config);

  std::string complete(const std::string& prompt,
                       const std::string& request_id) override;

  const HttpTeacherConfig& config() const { return config_; }

 private:
  HttpTeacherConfig config_;
};

// min(backoff_max_ms, backoff_base_ms * 2^attempt) for attempt >= 0.
int backoff_delay_ms(const HttpTeacherConfig& config, int attempt);

}  // namespace distill
