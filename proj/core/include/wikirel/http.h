#ifndef WIKIREL_HTTP_H_
#define WIKIREL_HTTP_H_

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>

namespace wikirel {

struct HttpResponse {
  int status = 0;
  std::string body;
};

// Transport failure, exhausted retries, or a cache miss in offline mode.
class HttpError : public std::runtime_error {
 public:
  HttpError(const std::string& what, int status = 0)
      : std::runtime_error(what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

class HttpClient {
 public:
  virtual ~HttpClient() = default;
  // Returns any HTTP status; throws HttpError on transport failure.
  virtual HttpResponse get(const std::string& url) = 0;
};

// cpp-httplib backed client with TLS support.
class HttplibClient : public HttpClient {
 public:
  explicit HttplibClient(std::string user_agent,
                         std::chrono::seconds timeout = std::chrono::seconds{60});
  HttpResponse get(const std::string& url) override;

 private:
  std::string user_agent_;
  std::chrono::seconds timeout_;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;
Sleeper thread_sleeper();

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds initial_delay{500};
  std::chrono::milliseconds max_delay{30000};
};

// Retries transport errors, 429 and 5xx responses with capped exponential
// backoff. After the last attempt the failure is thrown as HttpError.
class RetryingClient : public HttpClient {
 public:
  RetryingClient(HttpClient& inner, RetryPolicy policy, Sleeper sleep = thread_sleeper());
  HttpResponse get(const std::string& url) override;

 private:
  HttpClient& inner_;
  RetryPolicy policy_;
  Sleeper sleep_;
};

// Spaces requests at least 1/rate seconds apart.
class RateLimitedClient : public HttpClient {
 public:
  using Clock = std::chrono::steady_clock;

  RateLimitedClient(HttpClient& inner, double requests_per_second,
                    Sleeper sleep = thread_sleeper(),
                    std::function<Clock::time_point()> now = Clock::now);
  HttpResponse get(const std::string& url) override;

 private:
  HttpClient& inner_;
  std::chrono::nanoseconds interval_;
  Sleeper sleep_;
  std::function<Clock::time_point()> now_;
  std::mutex mu_;
  std::optional<Clock::time_point> last_;
};

// Stores successful (2xx) and 404 responses as
// <dir>/http/<fnv1a64(url)>.json = {"url", "status", "body"}.
// Without an inner client every miss throws HttpError.
class CachingClient : public HttpClient {
 public:
  CachingClient(HttpClient* inner, std::filesystem::path dir);
  HttpResponse get(const std::string& url) override;

  std::filesystem::path path_for(const std::string& url) const;
  std::size_t network_calls() const { return network_calls_; }

 private:
  HttpClient* inner_;
  std::filesystem::path dir_;
  std::mutex mu_;
  std::size_t network_calls_ = 0;
};

// Writes a cache envelope; used to seed caches for offline runs.
void write_cache_entry(const std::filesystem::path& dir, const std::string& url,
                       const HttpResponse& response);

// Writes via a temporary file and rename so readers never see partial files.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::optional<std::string> read_file(const std::filesystem::path& path);

}  // namespace wikirel

#endif  // WIKIREL_HTTP_H_
