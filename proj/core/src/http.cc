#include "wikirel/http.h"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <fstream>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "wikirel/strings.h"

namespace wikirel {

using nlohmann::json;

HttplibClient::HttplibClient(std::string user_agent, std::chrono::seconds timeout)
    : user_agent_(std::move(user_agent)), timeout_(timeout) {}

HttpResponse HttplibClient::get(const std::string& url) {
  auto sep = url.find("://");
  if (sep == std::string::npos) throw HttpError("not an absolute URL: " + url);
  auto path_start = url.find('/', sep + 3);
  std::string origin = url.substr(0, path_start);
  std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

  httplib::Client client(origin);
  client.set_follow_location(true);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  httplib::Headers headers{{"User-Agent", user_agent_}, {"Accept-Encoding", "identity"}};
  auto res = client.Get(path, headers);
  if (!res) throw HttpError("GET " + url + " failed: " + httplib::to_string(res.error()));
  return HttpResponse{res->status, std::move(res->body)};
}

Sleeper thread_sleeper() {
  return [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

RetryingClient::RetryingClient(HttpClient& inner, RetryPolicy policy, Sleeper sleep)
    : inner_(inner), policy_(policy), sleep_(std::move(sleep)) {}

HttpResponse RetryingClient::get(const std::string& url) {
  auto delay = policy_.initial_delay;
  for (int attempt = 1;; ++attempt) {
    std::string failure;
    int status = 0;
    try {
      auto res = inner_.get(url);
      if (res.status != 429 && res.status < 500) return res;
      status = res.status;
      failure = "HTTP " + std::to_string(res.status);
    } catch (const HttpError& e) {
      failure = e.what();
    }
    if (attempt >= policy_.max_attempts) {
      throw HttpError("GET " + url + " gave up after " + std::to_string(attempt) +
                          " attempts: " + failure,
                      status);
    }
    sleep_(delay);
    delay = std::min(delay * 2, policy_.max_delay);
  }
}

RateLimitedClient::RateLimitedClient(HttpClient& inner, double requests_per_second,
                                     Sleeper sleep, std::function<Clock::time_point()> now)
    : inner_(inner),
      interval_(requests_per_second > 0
                    ? std::chrono::nanoseconds(static_cast<long long>(1e9 / requests_per_second))
                    : std::chrono::nanoseconds{0}),
      sleep_(std::move(sleep)),
      now_(std::move(now)) {}

HttpResponse RateLimitedClient::get(const std::string& url) {
  {
    std::lock_guard lock(mu_);
    auto t = now_();
    if (last_ && t < *last_ + interval_) {
      auto wait = *last_ + interval_ - t;
      sleep_(std::chrono::ceil<std::chrono::milliseconds>(wait));
      t = *last_ + interval_;
    }
    last_ = t;
  }
  return inner_.get(url);
}

CachingClient::CachingClient(HttpClient* inner, std::filesystem::path dir)
    : inner_(inner), dir_(std::move(dir)) {}

std::filesystem::path CachingClient::path_for(const std::string& url) const {
  return dir_ / "http" / (hex64(fnv1a64(url)) + ".json");
}

HttpResponse CachingClient::get(const std::string& url) {
  auto path = path_for(url);
  if (auto text = read_file(path)) {
    auto j = json::parse(*text, nullptr, false);
    if (!j.is_discarded() && j.value("url", "") == url) {
      return HttpResponse{j.at("status").get<int>(), j.at("body").get<std::string>()};
    }
  }
  if (inner_ == nullptr) throw HttpError("offline cache miss: " + url);
  HttpResponse res;
  {
    std::lock_guard lock(mu_);
    ++network_calls_;
  }
  res = inner_->get(url);
  if ((res.status >= 200 && res.status < 300) || res.status == 404) {
    write_cache_entry(dir_, url, res);
  }
  return res;
}

void write_cache_entry(const std::filesystem::path& dir, const std::string& url,
                       const HttpResponse& response) {
  json j{{"url", url}, {"status", response.status}, {"body", response.body}};
  write_file_atomic(dir / "http" / (hex64(fnv1a64(url)) + ".json"),
                    j.dump(-1, ' ', false, json::error_handler_t::replace));
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::optional<std::string> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace wikirel
