#pragma once

#include "commentcast/digest.hpp"
#include "commentcast/error.hpp"
#include "commentcast/ingest/wav.hpp"
#include "commentcast/providers/engine.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <map>
#include <string>
#include <thread>

namespace commentcast::providers {

struct RemoteOptions {
  std::string base_url;                      // e.g. https://llm.internal:8443/api
  std::string auth_token;                    // sent as a bearer token when non-empty
  double timeout_s = 30.0;
  int retries = 2;
  double backoff_initial_s = 0.5;            // doubles after every failed attempt
  double temperature = 0.8;                  // forwarded to generative capabilities
  std::map<std::string, std::string> prompts;  // capability wire name -> prompt text
};

/// HTTP JSON client: POST `<base_url>/v1/<capability>` with the payload as
/// body, expecting `{"result": ...}`. Transport errors, 429 and 5xx are
/// retried with exponential backoff; any other non-2xx fails immediately.
class RemoteEngine final : public Engine {
 public:
  explicit RemoteEngine(RemoteOptions options) : options_(std::move(options)) {
    const auto scheme = options_.base_url.find("://");
    const auto path_start =
        options_.base_url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    host_ = options_.base_url.substr(0, path_start);
    if (path_start != std::string::npos) prefix_ = options_.base_url.substr(path_start);
    while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
  }

  std::string fingerprint() const override {
    nlohmann::json j = {{"engine", "remote-v1"},
                        {"base_url", options_.base_url},
                        {"temperature", options_.temperature},
                        {"prompts", options_.prompts}};
    return j.dump();
  }

  nlohmann::json invoke(const ProviderRequest& request) const override {
    auto response = post(request);
    if (!response.is_object() || !response.contains("result")) {
      throw Error(ErrorCode::ProviderFailure,
                  std::string(wire_name(request.capability)) + ": response lacks 'result'");
    }
    return std::move(response["result"]);
  }

  PcmAudio synthesize(const ProviderRequest& request) const override {
    const auto result = invoke(request);
    if (!result.is_object() || !result.contains("wav_base64")) {
      throw Error(ErrorCode::ProviderFailure, "tts: result lacks 'wav_base64'");
    }
    const double rate_min = request.payload.value("rate_min", 1.1);
    const double rate_max = request.payload.value("rate_max", 1.2);
    if (auto it = result.find("rate"); it != result.end() && it->is_number()) {
      const double rate = it->get<double>();
      if (rate < rate_min - 1e-9 || rate > rate_max + 1e-9) {
        throw Error(ErrorCode::DurationUnachievable,
                    "tts: service needed speech rate " + std::to_string(rate) + " outside [" +
                        std::to_string(rate_min) + ", " + std::to_string(rate_max) + "]");
      }
    }
    try {
      return wav::decode(digest::base64_decode(result["wav_base64"].get<std::string>()));
    } catch (const std::invalid_argument& e) {
      throw Error(ErrorCode::ProviderFailure, std::string("tts: ") + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::ProviderFailure, std::string("tts: ") + e.what());
    }
  }

  const RemoteOptions& options() const { return options_; }

 private:
  nlohmann::json post(const ProviderRequest& request) const {
    const auto name = std::string(wire_name(request.capability));
    nlohmann::json body = request.payload;
    if (request.capability != Capability::Embed && request.capability != Capability::LogProb &&
        request.capability != Capability::Tts) {
      body["temperature"] = options_.temperature;
    }
    if (auto it = options_.prompts.find(name); it != options_.prompts.end()) body["prompt"] = it->second;
    const auto path = prefix_ + "/v1/" + name;
    const auto payload = body.dump();

    std::string last_error;
    auto backoff = std::chrono::duration<double>(options_.backoff_initial_s);
    for (int attempt = 0; attempt <= options_.retries; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(backoff);
        backoff *= 2;
      }
      httplib::Client client(host_);
      const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
          std::chrono::duration<double>(options_.timeout_s));
      client.set_connection_timeout(timeout);
      client.set_read_timeout(timeout);
      client.set_write_timeout(timeout);
      httplib::Headers headers;
      if (!options_.auth_token.empty()) headers.emplace("Authorization", "Bearer " + options_.auth_token);
      const auto res = client.Post(path, headers, payload, "application/json");
      if (!res) {
        last_error = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status >= 200 && res->status < 300) {
        try {
          return nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::parse_error& e) {
          throw Error(ErrorCode::ProviderFailure, name + ": invalid JSON response: " + e.what());
        }
      }
      last_error = "HTTP " + std::to_string(res->status);
      if (res->status != 429 && res->status < 500) break;
    }
    throw Error(ErrorCode::ProviderFailure, name + " at " + host_ + path + ": " + last_error);
  }

  RemoteOptions options_;
  std::string host_;
  std::string prefix_;
};

}  // namespace commentcast::providers
