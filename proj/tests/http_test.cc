#include "wikirel/http.h"

#include <gtest/gtest.h>

#include <filesystem>

namespace wikirel {
namespace {

namespace fs = std::filesystem;

class FakeClient : public HttpClient {
 public:
  std::vector<std::variant<HttpResponse, std::string>> script;
  int calls = 0;
  HttpResponse get(const std::string&) override {
    auto step = script.at(std::min<std::size_t>(calls, script.size() - 1));
    ++calls;
    if (auto* err = std::get_if<std::string>(&step)) throw HttpError(*err);
    return std::get<HttpResponse>(step);
  }
};

struct RecordingSleeper {
  std::vector<std::chrono::milliseconds> delays;
  Sleeper fn() {
    return [this](std::chrono::milliseconds d) { delays.push_back(d); };
  }
};

fs::path temp_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("wikirel_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  return p;
}

TEST(RetryingClient, BacksOffExponentiallyWithCap) {
  FakeClient inner;
  inner.script = {std::string("reset"), HttpResponse{503, ""}, HttpResponse{429, ""},
                  HttpResponse{500, ""}, HttpResponse{200, "ok"}};
  RecordingSleeper sleeper;
  RetryingClient client(inner, RetryPolicy{5, std::chrono::milliseconds{100},
                                           std::chrono::milliseconds{300}},
                        sleeper.fn());
  auto res = client.get("https://x.org/");
  EXPECT_EQ(res.body, "ok");
  EXPECT_EQ(inner.calls, 5);
  using ms = std::chrono::milliseconds;
  EXPECT_EQ(sleeper.delays, (std::vector<ms>{ms{100}, ms{200}, ms{300}, ms{300}}));
}

TEST(RetryingClient, GivesUpAfterMaxAttempts) {
  FakeClient inner;
  inner.script = {HttpResponse{502, ""}};
  RecordingSleeper sleeper;
  RetryingClient client(inner, RetryPolicy{3, std::chrono::milliseconds{1},
                                           std::chrono::milliseconds{10}},
                        sleeper.fn());
  try {
    client.get("https://x.org/");
    FAIL();
  } catch (const HttpError& e) {
    EXPECT_EQ(e.status(), 502);
  }
  EXPECT_EQ(inner.calls, 3);
  EXPECT_EQ(sleeper.delays.size(), 2u);
}

TEST(RetryingClient, ClientErrorsAreNotRetried) {
  FakeClient inner;
  inner.script = {HttpResponse{404, "missing"}};
  RetryingClient client(inner, RetryPolicy{}, RecordingSleeper{}.fn());
  EXPECT_EQ(client.get("https://x.org/").status, 404);
  EXPECT_EQ(inner.calls, 1);
}

TEST(RateLimitedClient, SpacesRequests) {
  FakeClient inner;
  inner.script = {HttpResponse{200, ""}};
  using Clock = RateLimitedClient::Clock;
  Clock::time_point now{};
  std::vector<std::chrono::milliseconds> slept;
  RateLimitedClient client(
      inner, 4.0,
      [&](std::chrono::milliseconds d) {
        slept.push_back(d);
        now += d;
      },
      [&] { return now; });
  client.get("a");
  client.get("b");
  now += std::chrono::milliseconds{100};
  client.get("c");
  now += std::chrono::seconds{1};
  client.get("d");
  using ms = std::chrono::milliseconds;
  EXPECT_EQ(slept, (std::vector<ms>{ms{250}, ms{150}}));
}

TEST(CachingClient, SecondRequestIsServedFromDisk) {
  auto dir = temp_dir("cache");
  FakeClient inner;
  inner.script = {HttpResponse{200, "{\"v\":1}"}};
  CachingClient cache(&inner, dir);
  auto a = cache.get("https://api.example/x?y=1");
  auto b = cache.get("https://api.example/x?y=1");
  EXPECT_EQ(a.body, b.body);
  EXPECT_EQ(inner.calls, 1);
  EXPECT_EQ(cache.network_calls(), 1u);
  EXPECT_TRUE(fs::exists(cache.path_for("https://api.example/x?y=1")));

  CachingClient offline(nullptr, dir);
  EXPECT_EQ(offline.get("https://api.example/x?y=1").body, "{\"v\":1}");
  EXPECT_THROW(offline.get("https://api.example/other"), HttpError);
  fs::remove_all(dir);
}

TEST(CachingClient, ServerErrorsAreNotCached) {
  auto dir = temp_dir("cache5xx");
  FakeClient inner;
  inner.script = {HttpResponse{500, ""}, HttpResponse{200, "ok"}};
  CachingClient cache(&inner, dir);
  EXPECT_EQ(cache.get("u").status, 500);
  EXPECT_EQ(cache.get("u").status, 200);
  EXPECT_EQ(cache.get("u").status, 200);
  EXPECT_EQ(inner.calls, 2);
  fs::remove_all(dir);
}

TEST(HttplibClient, ReportsTransportFailure) {
  HttplibClient client("wikirel-test/0.1", std::chrono::seconds{1});
  EXPECT_THROW(client.get("http://127.0.0.1:1/"), HttpError);
  EXPECT_THROW(client.get("not-a-url"), HttpError);
}

}  // namespace
}  // namespace wikirel
