#include "commentcast/providers.hpp"
#include "commentcast/providers/remote.hpp"

#include "../support.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include <atomic>
#include <thread>

using namespace commentcast;
using namespace commentcast::providers;

namespace {

// Local HTTP service on an ephemeral port, torn down with the fixture.
class LocalService {
 public:
  LocalService() {
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalService() {
    server_.stop();
    thread_.join();
  }
  httplib::Server& server() { return server_; }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

RemoteOptions fast(const std::string& url) {
  RemoteOptions o;
  o.base_url = url;
  o.timeout_s = 2;
  o.backoff_initial_s = 0.01;
  return o;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Io;
}

}  // namespace

TEST(Remote, SendsPayloadPromptTemperatureAndToken) {
  LocalService svc;
  nlohmann::json seen;
  std::string auth;
  svc.server().Post("/api/v1/creativity_rate", [&](const httplib::Request& req, httplib::Response& res) {
    seen = nlohmann::json::parse(req.body);
    auth = req.get_header_value("Authorization");
    res.set_content(R"({"result": 7})", "application/json");
  });
  auto opts = fast(svc.url() + "/api/");
  opts.auth_token = "tok";
  opts.temperature = 0.3;
  opts.prompts[std::string(wire_name(Capability::CreativityRate))] = "Rate it.";
  RemoteEngine engine(opts);
  Providers p(engine);
  EXPECT_EQ(p.rate_creativity("hello"), 7);
  EXPECT_EQ(seen.at("text"), "hello");
  EXPECT_EQ(seen.at("prompt"), "Rate it.");
  EXPECT_DOUBLE_EQ(seen.at("temperature").get<double>(), 0.3);
  EXPECT_EQ(auth, "Bearer tok");
}

TEST(Remote, RetriesServerErrors) {
  LocalService svc;
  std::atomic<int> calls{0};
  svc.server().Post("/v1/sentiment", [&](const httplib::Request&, httplib::Response& res) {
    if (calls.fetch_add(1) < 2) {
      res.status = 503;
      return;
    }
    res.set_content(R"({"result": "negative"})", "application/json");
  });
  RemoteEngine engine(fast(svc.url()));
  EXPECT_EQ(Providers(engine).sentiment("x"), Sentiment::Negative);
  EXPECT_EQ(calls.load(), 3);
}

TEST(Remote, ClientErrorFailsWithoutRetry) {
  LocalService svc;
  std::atomic<int> calls{0};
  svc.server().Post("/v1/embed", [&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 404;
  });
  RemoteEngine engine(fast(svc.url()));
  EXPECT_EQ(code_of([&] { Providers(engine).embed("x"); }), ErrorCode::ProviderFailure);
  EXPECT_EQ(calls.load(), 1);
}

TEST(Remote, UnreachableIsProviderFailure) {
  // Port 1 on loopback has no listener, so connects are refused at once.
  RemoteEngine engine(fast("http://127.0.0.1:1"));
  EXPECT_EQ(code_of([&] { Providers(engine).embed("x"); }), ErrorCode::ProviderFailure);
}

TEST(Remote, TtsDecodesBase64AndChecksRate) {
  LocalService svc;
  double reported_rate = 1.15;
  svc.server().Post("/v1/tts", [&](const httplib::Request& req, httplib::Response& res) {
    const auto body = nlohmann::json::parse(req.body);
    const double target = body.at("target_duration_s").get<double>();
    const auto audio = testing_support::sine(330, target / 1.15, 16000, 0.5);
    const auto bytes = wav::encode(audio);
    nlohmann::json out = {{"result", {{"wav_base64", digest::base64_encode(bytes)}, {"rate", reported_rate}}}};
    res.set_content(out.dump(), "application/json");
  });
  RemoteEngine engine(fast(svc.url()));
  Providers p(engine);
  const auto speech = p.tts("hello", Tone::V1, 2.0);
  EXPECT_NEAR(speech.duration_s, 2.0 / 1.15, 1e-3);
  EXPECT_EQ(speech.audio.sample_rate, 16000);
  reported_rate = 1.4;
  EXPECT_EQ(code_of([&] { p.tts("hello", Tone::V1, 2.0); }), ErrorCode::DurationUnachievable);
}

TEST(Remote, MissingResultField) {
  LocalService svc;
  svc.server().Post("/v1/logprob", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"value": -3})", "application/json");
  });
  RemoteEngine engine(fast(svc.url()));
  EXPECT_EQ(code_of([&] { Providers(engine).logprob("a", "b", "c"); }), ErrorCode::ProviderFailure);
}
