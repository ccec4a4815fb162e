#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <utility>

#include <httplib.h>

#include "raglog/error.hpp"

namespace raglog {

struct HttpResponse {
  int status = 0;          // 0 when the request never produced a response
  std::string body;
  std::string transport_error;
};

/// POST-only JSON transport; swapped for scripted stubs in tests.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post_json(const std::string& path, const std::string& body,
                                 const std::string& bearer_token) = 0;
};

/// Splits "https://host:port/v1" into the origin and the path prefix.
inline std::pair<std::string, std::string> split_base_url(std::string url) {
  while (!url.empty() && url.back() == '/') url.pop_back();
  const auto scheme_end = url.find("://");
  const auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  if (path_start == std::string::npos) return {url, ""};
  return {url.substr(0, path_start), url.substr(path_start)};
}

class HttplibTransport final : public HttpTransport {
 public:
  explicit HttplibTransport(const std::string& base_url, std::chrono::seconds timeout = std::chrono::seconds(60)) {
    auto [origin, prefix] = split_base_url(base_url);
    origin_ = std::move(origin);
    prefix_ = std::move(prefix);
    timeout_ = timeout;
  }

  HttpResponse post_json(const std::string& path, const std::string& body,
                         const std::string& bearer_token) override {
    httplib::Headers headers;
    if (!bearer_token.empty()) headers.emplace("Authorization", "Bearer " + bearer_token);
    // One client per call: requests may be issued from several threads.
    httplib::Client client(origin_);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);
    auto res = client.Post(prefix_ + path, headers, body, "application/json");
    HttpResponse out;
    if (!res) {
      out.transport_error = httplib::to_string(res.error());
      return out;
    }
    out.status = res->status;
    out.body = res->body;
    return out;
  }

 private:
  std::string origin_;
  std::string prefix_;
  std::chrono::seconds timeout_;
};

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds base_delay{500};
  double factor = 2.0;
  std::function<void(std::chrono::milliseconds)> sleep = [](std::chrono::milliseconds d) {
    std::this_thread::sleep_for(d);
  };

  [[nodiscard]] std::chrono::milliseconds delay_before(int attempt) const {
    // attempt is 1-based; no delay before the first one.
    double d = static_cast<double>(base_delay.count());
    for (int i = 2; i < attempt; ++i) d *= factor;
    return std::chrono::milliseconds(static_cast<long long>(d));
  }
};

inline bool is_transient(const HttpResponse& r) {
  return r.status == 0 || r.status == 429 || r.status >= 500;
}

struct RetriedResponse {
  HttpResponse response;
  int attempts = 0;
};

/// Posts with exponential backoff on transient failures. Returns the first
/// 2xx response; throws RemoteError once attempts run out or on a
/// non-transient status.
inline RetriedResponse post_with_retry(HttpTransport& transport, const RetryPolicy& policy,
                                       const std::string& path, const std::string& body,
                                       const std::string& token) {
  HttpResponse last;
  for (int attempt = 1; attempt <= policy.max_attempts; ++attempt) {
    if (attempt > 1 && policy.sleep) policy.sleep(policy.delay_before(attempt));
    last = transport.post_json(path, body, token);
    if (last.status >= 200 && last.status < 300) return {std::move(last), attempt};
    if (!is_transient(last)) {
      throw Error(Errc::RemoteError, path + " returned HTTP " + std::to_string(last.status));
    }
  }
  const std::string why =
      last.status == 0 ? last.transport_error : "HTTP " + std::to_string(last.status);
  throw Error(Errc::RemoteError,
              path + " failed after " + std::to_string(policy.max_attempts) + " attempts (" + why + ")");
}

}  // namespace raglog
