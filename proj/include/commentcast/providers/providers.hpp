#pragma once

#include "commentcast/error.hpp"
#include "commentcast/ingest/types.hpp"
#include "commentcast/ingest/wav.hpp"
#include "commentcast/providers/engine.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace commentcast::providers {

struct TopicProposal {
  std::string summary;
  std::vector<std::size_t> members;  // indices into the comments passed in
};

struct TopicForDescription {
  std::string summary;
  std::vector<std::string> comments;
};

struct SpeechAudio {
  PcmAudio audio;
  double duration_s = 0.0;
};

inline constexpr double kMinSpeechRate = 1.1;
inline constexpr double kMaxSpeechRate = 1.2;

/// Typed front end over an Engine. Builds wire payloads, checks the shape and
/// range of every answer, and turns malformed answers into ProviderFailure.
class Providers {
 public:
  explicit Providers(const Engine& engine, Warnings* warnings = nullptr)
      : engine_(engine), warnings_(warnings) {}

  const Engine& engine() const { return engine_; }

  std::vector<double> embed(std::string_view text) const {
    const auto result = call(Capability::Embed, {{"text", text}});
    std::vector<double> v;
    try {
      v = result.get<std::vector<double>>();
    } catch (const nlohmann::json::exception&) {
      fail(Capability::Embed, "expected an array of numbers");
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    if (v.empty() || !(norm > 0.0) || !std::isfinite(norm)) fail(Capability::Embed, "zero or non-finite vector");
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    return v;
  }

  int rate_creativity(std::string_view text) const {
    const auto result = call(Capability::CreativityRate, {{"text", text}});
    if (!result.is_number()) fail(Capability::CreativityRate, "expected a number");
    const double raw = result.get<double>();
    const int rating = static_cast<int>(std::lround(raw));
    if (rating < 1 || rating > 10) {
      warn("creativity rating " + std::to_string(raw) + " clamped to [1, 10]");
      return rating < 1 ? 1 : 10;
    }
    return rating;
  }

  Sentiment sentiment(std::string_view text) const {
    const auto result = call(Capability::Sentiment, {{"text", text}});
    const auto label = result.is_string() ? parse_sentiment(result.get<std::string>()) : std::nullopt;
    if (!label) fail(Capability::Sentiment, "expected positive|neutral|negative");
    return *label;
  }

  double logprob(std::string_view before, std::string_view candidate, std::string_view after) const {
    const auto result = call(Capability::LogProb,
                             {{"context_before", before}, {"candidate", candidate}, {"context_after", after}});
    if (!result.is_number()) fail(Capability::LogProb, "expected a number");
    const double value = result.get<double>();
    if (!std::isfinite(value) || value > 0.0) fail(Capability::LogProb, "log probability must be finite and <= 0");
    return value;
  }

  // Speech whose length must land in [target/1.2, target/1.0]; anything else
  // is DurationUnachievable.
  SpeechAudio tts(std::string_view text, Tone tone, double target_duration_s) const {
    if (!(target_duration_s > 0.0)) throw Error(ErrorCode::InvalidInput, "tts target duration must be positive");
    const auto request = ProviderRequest::make(Capability::Tts, {{"text", text},
                                                                 {"tone", wire_name(tone)},
                                                                 {"target_duration_s", target_duration_s},
                                                                 {"rate_min", kMinSpeechRate},
                                                                 {"rate_max", kMaxSpeechRate}});
    SpeechAudio out;
    out.audio = engine_.synthesize(request);
    if (out.audio.channels != 1) fail(Capability::Tts, "expected mono audio");
    out.duration_s = out.audio.duration_s();
    constexpr double kSlack = 1e-3;
    if (out.duration_s < target_duration_s / kMaxSpeechRate - kSlack ||
        out.duration_s > target_duration_s + kSlack) {
      throw Error(ErrorCode::DurationUnachievable,
                  "tts produced " + std::to_string(out.duration_s) + " s for a " +
                      std::to_string(target_duration_s) + " s slot");
    }
    return out;
  }

  std::vector<TopicProposal> topic_model(const std::vector<DanmuComment>& comments) const {
    nlohmann::json list = nlohmann::json::array();
    for (std::size_t i = 0; i < comments.size(); ++i) {
      list.push_back({{"index", i}, {"text", comments[i].text}, {"time_ms", comments[i].video_time_ms}});
    }
    const auto result = call(Capability::TopicModel, {{"comments", list}});
    if (!result.is_array()) fail(Capability::TopicModel, "expected an array of topics");
    std::vector<TopicProposal> topics;
    std::set<std::size_t> seen;
    for (const auto& item : result) {
      TopicProposal t;
      try {
        t.summary = item.at("summary").get<std::string>();
        for (const auto& idx : item.at("comment_indices")) {
          const auto i = idx.get<std::size_t>();
          if (i >= comments.size()) fail(Capability::TopicModel, "comment index out of range");
          // A comment belongs to at most one topic; later claims are ignored.
          if (seen.insert(i).second) t.members.push_back(i);
        }
      } catch (const nlohmann::json::exception&) {
        fail(Capability::TopicModel, "topic entries need 'summary' and 'comment_indices'");
      }
      if (t.summary.find_first_not_of(" \t\r\n") == std::string::npos) {
        fail(Capability::TopicModel, "empty topic summary");
      }
      if (!t.members.empty()) topics.push_back(std::move(t));
    }
    return topics;
  }

  // Returns the order (indices into `comments`) the dialogue should follow.
  // The engine may drop further redundant comments but never all of them.
  std::vector<std::size_t> dialogue_reorder(std::string_view summary, const std::vector<DanmuComment>& comments) const {
    nlohmann::json list = nlohmann::json::array();
    for (std::size_t i = 0; i < comments.size(); ++i) {
      list.push_back({{"index", i},
                      {"text", comments[i].text},
                      {"time_ms", comments[i].video_time_ms},
                      {"post_epoch_s", comments[i].post_epoch_s},
                      {"user_hash", comments[i].user_hash}});
    }
    const auto result = call(Capability::DialogueReorder, {{"summary", summary}, {"comments", list}});
    std::vector<std::size_t> order;
    std::set<std::size_t> seen;
    try {
      for (const auto& idx : result) {
        const auto i = idx.get<std::size_t>();
        if (i >= comments.size() || !seen.insert(i).second) fail(Capability::DialogueReorder, "bad or repeated index");
        order.push_back(i);
      }
    } catch (const nlohmann::json::exception&) {
      fail(Capability::DialogueReorder, "expected an array of indices");
    }
    if (order.empty() && !comments.empty()) fail(Capability::DialogueReorder, "every comment was removed");
    return order;
  }

  // One entry per topic: the description, or nullopt when the engine answers "None".
  std::vector<std::optional<std::string>> visual_describe(const std::vector<TopicForDescription>& topics,
                                                          const std::vector<KeyframeRef>& keyframes) const {
    nlohmann::json topic_list = nlohmann::json::array();
    for (const auto& t : topics) topic_list.push_back({{"summary", t.summary}, {"comments", t.comments}});
    const auto result = call(Capability::VisualDescribe, {{"topics", topic_list}, {"keyframes", keyframes}});
    if (!result.is_array() || result.size() != topics.size()) {
      fail(Capability::VisualDescribe, "expected one answer per topic");
    }
    std::vector<std::optional<std::string>> out;
    for (const auto& item : result) {
      if (item.is_null()) {
        out.emplace_back();
        continue;
      }
      if (!item.is_string()) fail(Capability::VisualDescribe, "answers must be strings");
      auto s = item.get<std::string>();
      std::string bare;
      for (char c : s) {
        if (c != ' ' && c != '.' && c != '\'' && c != '"' && c != '\n') bare += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      }
      if (bare.empty() || bare == "none") {
        out.emplace_back();
      } else {
        out.emplace_back(std::move(s));
      }
    }
    return out;
  }

  // Proposed split points: k means "split after sentence k" (0-based, local).
  std::vector<std::size_t> segment_split(const std::vector<std::string>& sentences) const {
    const auto result = call(Capability::SegmentSplit, {{"sentences", sentences}});
    std::vector<std::size_t> splits;
    try {
      for (const auto& idx : result) {
        const auto k = idx.get<std::size_t>();
        if (k + 1 >= sentences.size()) fail(Capability::SegmentSplit, "split index out of range");
        splits.push_back(k);
      }
    } catch (const nlohmann::json::exception&) {
      fail(Capability::SegmentSplit, "expected an array of indices");
    }
    std::sort(splits.begin(), splits.end());
    splits.erase(std::unique(splits.begin(), splits.end()), splits.end());
    return splits;
  }

 private:
  nlohmann::json call(Capability capability, nlohmann::json payload) const {
    return engine_.invoke(ProviderRequest::make(capability, std::move(payload)));
  }

  [[noreturn]] static void fail(Capability capability, const std::string& why) {
    throw Error(ErrorCode::ProviderFailure, std::string(wire_name(capability)) + ": " + why);
  }

  void warn(std::string message) const {
    if (warnings_) warnings_->add(std::move(message));
  }

  const Engine& engine_;
  Warnings* warnings_;
};

}  // namespace commentcast::providers
