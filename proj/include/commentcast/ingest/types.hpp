#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <tuple>
#include <string>
#include <utility>
#include <vector>

namespace commentcast {

struct TimedSentence {
  int index = 0;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  std::string text;

  bool operator==(const TimedSentence&) const = default;
};

struct DanmuComment {
  std::int64_t video_time_ms = 0;
  int mode = 1;              // 1-3 scroll, 4 bottom, 5 top
  std::uint32_t color = 0;   // 24-bit RGB
  std::int64_t post_epoch_s = 0;
  std::string user_hash;
  std::string text;

  bool operator==(const DanmuComment&) const = default;
};

// Canonical comment order: video time, then post time, then user hash.
inline bool comment_before(const DanmuComment& a, const DanmuComment& b) {
  return std::tie(a.video_time_ms, a.post_epoch_s, a.user_hash) <
         std::tie(b.video_time_ms, b.post_epoch_s, b.user_hash);
}

struct KeyframeRef {
  std::int64_t time_ms = 0;
  std::string image_path;
  std::optional<std::string> caption_hint;

  bool operator==(const KeyframeRef&) const = default;
};

// Sliding-window RMS over full-scale-normalized samples. Window k covers
// [k*hop_s, k*hop_s + window_s) clipped to the audio duration.
struct VolumeEnvelope {
  double window_s = 1.0;
  double hop_s = 0.25;
  std::int64_t duration_ms = 0;
  std::vector<double> rms;

  std::pair<std::int64_t, std::int64_t> window_span_ms(std::size_t k) const {
    const auto start = static_cast<std::int64_t>(std::llround(static_cast<double>(k) * hop_s * 1000.0));
    const auto end = start + static_cast<std::int64_t>(std::llround(window_s * 1000.0));
    return {start, std::min(end, duration_ms)};
  }
};

inline void to_json(nlohmann::json& j, const TimedSentence& s) {
  j = {{"index", s.index}, {"start_ms", s.start_ms}, {"end_ms", s.end_ms}, {"text", s.text}};
}
inline void from_json(const nlohmann::json& j, TimedSentence& s) {
  j.at("index").get_to(s.index);
  j.at("start_ms").get_to(s.start_ms);
  j.at("end_ms").get_to(s.end_ms);
  j.at("text").get_to(s.text);
}

inline void to_json(nlohmann::json& j, const DanmuComment& c) {
  j = {{"video_time_ms", c.video_time_ms}, {"mode", c.mode},       {"color", c.color},
       {"post_epoch_s", c.post_epoch_s},   {"user_hash", c.user_hash}, {"text", c.text}};
}
inline void from_json(const nlohmann::json& j, DanmuComment& c) {
  j.at("video_time_ms").get_to(c.video_time_ms);
  j.at("mode").get_to(c.mode);
  j.at("color").get_to(c.color);
  j.at("post_epoch_s").get_to(c.post_epoch_s);
  j.at("user_hash").get_to(c.user_hash);
  j.at("text").get_to(c.text);
}

inline void to_json(nlohmann::json& j, const KeyframeRef& k) {
  j = {{"time_ms", k.time_ms}, {"image_path", k.image_path}};
  if (k.caption_hint) j["caption_hint"] = *k.caption_hint;
}
inline void from_json(const nlohmann::json& j, KeyframeRef& k) {
  j.at("time_ms").get_to(k.time_ms);
  j.at("image_path").get_to(k.image_path);
  k.caption_hint.reset();
  if (auto it = j.find("caption_hint"); it != j.end() && !it->is_null()) {
    k.caption_hint = it->get<std::string>();
  }
}

}  // namespace commentcast
