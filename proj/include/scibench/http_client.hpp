#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <string>
#include <string_view>

#include "scibench/error.hpp"

namespace scibench {

struct HttpEndpoint {
  std::string url;  // http(s)://host[:port]/path
  std::string api_key;
  int max_retries = 3;
  std::chrono::milliseconds timeout{30000};
  std::chrono::milliseconds backoff{100};
  std::size_t max_in_flight = 4;
};

/// Reads `url_var` / `key_var` from the environment; empty url when unset.
HttpEndpoint endpoint_from_env(const char* url_var, const char* key_var);

/// Minimal JSON-over-HTTP POST client shared by the classifier and judge
/// hooks. Thread-safe; at most `max_in_flight` requests run at once.
class JsonHttpClient {
 public:
  /// `unavailable` is the error code raised once retries are exhausted.
  JsonHttpClient(HttpEndpoint endpoint, ErrorCode unavailable);
  ~JsonHttpClient();
  JsonHttpClient(const JsonHttpClient&) = delete;
  JsonHttpClient& operator=(const JsonHttpClient&) = delete;

  /// POSTs `body` (application/json) and returns the response body of the
  /// first 2xx reply. Connection errors, 429 and 5xx are retried with
  /// linear backoff; any other status fails immediately.
  std::string post(const std::string& body) const;

  const HttpEndpoint& endpoint() const { return endpoint_; }

 private:
  struct Impl;
  HttpEndpoint endpoint_;
  ErrorCode unavailable_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace scibench
