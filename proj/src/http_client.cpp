#include "scibench/http_client.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <regex>
#include <thread>

namespace scibench {

HttpEndpoint endpoint_from_env(const char* url_var, const char* key_var) {
  HttpEndpoint ep;
  if (const char* u = std::getenv(url_var)) ep.url = u;
  if (const char* k = std::getenv(key_var)) ep.api_key = k;
  return ep;
}

struct JsonHttpClient::Impl {
  std::string base;  // scheme://host:port
  std::string path;

  std::mutex mu;
  std::condition_variable cv;
  std::size_t in_flight = 0;
};

JsonHttpClient::JsonHttpClient(HttpEndpoint endpoint, ErrorCode unavailable)
    : endpoint_(std::move(endpoint)), unavailable_(unavailable), impl_(std::make_unique<Impl>()) {
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)", std::regex::icase);
  std::smatch m;
  if (!std::regex_match(endpoint_.url, m, kUrl)) {
    throw Error(ErrorCode::kInvalidConfig, "bad endpoint url \"" + endpoint_.url + "\"");
  }
  impl_->base = m[1].str();
  impl_->path = m[2].matched ? m[2].str() : "/";
  if (endpoint_.max_in_flight == 0) endpoint_.max_in_flight = 1;
  if (endpoint_.max_retries < 0) endpoint_.max_retries = 0;
}

JsonHttpClient::~JsonHttpClient() = default;

std::string JsonHttpClient::post(const std::string& body) const {
  {
    std::unique_lock lock(impl_->mu);
    impl_->cv.wait(lock, [&] { return impl_->in_flight < endpoint_.max_in_flight; });
    ++impl_->in_flight;
  }
  struct Release {
    Impl& impl;
    ~Release() {
      {
        std::lock_guard lock(impl.mu);
        --impl.in_flight;
      }
      impl.cv.notify_one();
    }
  } release{*impl_};

  httplib::Client client(impl_->base);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(endpoint_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(endpoint_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  httplib::Headers headers;
  if (!endpoint_.api_key.empty()) headers.emplace("Authorization", "Bearer " + endpoint_.api_key);

  std::string last_error;
  for (int attempt = 0; attempt <= endpoint_.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(endpoint_.backoff * attempt);
    auto res = client.Post(impl_->path, headers, body, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 200 && res->status < 300) return res->body;
    last_error = "HTTP " + std::to_string(res->status);
    if (res->status != 429 && res->status < 500) break;
  }
  throw Error(unavailable_, endpoint_.url + ": " + last_error + " after " +
                                std::to_string(endpoint_.max_retries + 1) + " attempt(s)");
}

}  // namespace scibench
