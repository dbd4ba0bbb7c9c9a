#pragma once

#include "commentcast/digest.hpp"
#include "commentcast/error.hpp"
#include "commentcast/ingest/wav.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace commentcast::providers {

// Every AI-dependent capability the pipeline consumes. The wire name doubles
// as the HTTP route segment and the cache subdirectory.
enum class Capability {
  TopicModel,
  DialogueReorder,
  VisualDescribe,
  SegmentSplit,
  Embed,
  CreativityRate,
  Sentiment,
  LogProb,
  Tts,
};

inline constexpr std::array<Capability, 9> kAllCapabilities = {
    Capability::TopicModel, Capability::DialogueReorder, Capability::VisualDescribe,
    Capability::SegmentSplit, Capability::Embed,         Capability::CreativityRate,
    Capability::Sentiment,  Capability::LogProb,         Capability::Tts};

constexpr std::string_view wire_name(Capability c) {
  switch (c) {
    case Capability::TopicModel: return "topic_model";
    case Capability::DialogueReorder: return "dialogue_reorder";
    case Capability::VisualDescribe: return "visual_describe";
    case Capability::SegmentSplit: return "segment_split";
    case Capability::Embed: return "embed";
    case Capability::CreativityRate: return "creativity_rate";
    case Capability::Sentiment: return "sentiment";
    case Capability::LogProb: return "logprob";
    case Capability::Tts: return "tts";
  }
  return "unknown";
}

// Voices: a narrator for visual descriptions plus three viewer tones.
enum class Tone { Narrator, V1, V2, V3 };

constexpr std::string_view wire_name(Tone t) {
  switch (t) {
    case Tone::Narrator: return "narrator";
    case Tone::V1: return "v1";
    case Tone::V2: return "v2";
    case Tone::V3: return "v3";
  }
  return "unknown";
}

inline std::optional<Tone> parse_tone(std::string_view s) {
  for (Tone t : {Tone::Narrator, Tone::V1, Tone::V2, Tone::V3}) {
    if (wire_name(t) == s) return t;
  }
  return std::nullopt;
}

enum class Sentiment { Positive, Neutral, Negative };

constexpr std::string_view wire_name(Sentiment s) {
  switch (s) {
    case Sentiment::Positive: return "positive";
    case Sentiment::Neutral: return "neutral";
    case Sentiment::Negative: return "negative";
  }
  return "unknown";
}

inline std::optional<Sentiment> parse_sentiment(std::string_view s) {
  for (Sentiment v : {Sentiment::Positive, Sentiment::Neutral, Sentiment::Negative}) {
    if (wire_name(v) == s) return v;
  }
  return std::nullopt;
}

// Canonical serialization: nlohmann objects are key-sorted, so dump() of an
// equal payload is byte-identical across runs.
inline std::string canonical(const nlohmann::json& payload) { return payload.dump(); }

struct ProviderRequest {
  Capability capability;
  nlohmann::json payload;
  std::string request_hash;

  static ProviderRequest make(Capability capability, nlohmann::json payload) {
    auto hash = digest::sha256_hex(std::string(wire_name(capability)) + "\n" + canonical(payload));
    return {capability, std::move(payload), std::move(hash)};
  }
};

/// Backend for provider capabilities.
///
/// invoke() returns the `result` value of the JSON wire contract for every
/// capability except Tts, which goes through synthesize(). Implementations
/// must be safe to call concurrently and throw Error(ProviderFailure) on
/// transport or service errors.
class Engine {
 public:
  virtual ~Engine() = default;

  // Identifies the backend and every setting that changes its answers; part
  // of the cache key.
  virtual std::string fingerprint() const = 0;

  virtual nlohmann::json invoke(const ProviderRequest& request) const = 0;

  virtual PcmAudio synthesize(const ProviderRequest& request) const = 0;
};

}  // namespace commentcast::providers
