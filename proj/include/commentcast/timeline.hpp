#pragma once

#include "commentcast/curation.hpp"
#include "commentcast/error.hpp"
#include "commentcast/ingest/types.hpp"
#include "commentcast/optimizer.hpp"
#include "commentcast/providers/engine.hpp"
#include "commentcast/segmentation.hpp"
#include "commentcast/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace commentcast {

using providers::Tone;

enum class EntryKind { AutoPlay, OnDemand };
enum class NotifySide { Left, Right };

NLOHMANN_JSON_SERIALIZE_ENUM(EntryKind, {{EntryKind::AutoPlay, "auto_play"}, {EntryKind::OnDemand, "on_demand"}})
NLOHMANN_JSON_SERIALIZE_ENUM(NotifySide, {{NotifySide::Left, "left"}, {NotifySide::Right, "right"}})

inline constexpr int kManifestVersion = 1;
inline constexpr double kResponseWindowS = 5.0;

struct DiscussionLine {
  std::string id;
  int topic_id = 0;
  Tone tone = Tone::V1;
  std::string text;
  double est_duration_s = 0.0;
  std::int64_t offset_ms = 0;  // from the entry's start (auto-play) or playback start (on-demand)
  std::int64_t duration_ms = 0;

  bool narrator() const { return tone == Tone::Narrator; }
  bool operator==(const DiscussionLine&) const = default;
};

struct TimelineEntry {
  int id = 0;
  EntryKind kind = EntryKind::AutoPlay;
  int point_id = 0;
  std::int64_t time_ms = 0;  // auto-play start, or notification time
  std::vector<int> topic_ids;
  std::vector<DiscussionLine> lines;
  std::optional<NotifySide> notify_side;
  std::optional<std::int64_t> rewind_target_ms;
  std::optional<double> response_window_s;

  std::int64_t total_ms() const { return lines.empty() ? 0 : lines.back().offset_ms + lines.back().duration_ms; }
  bool operator==(const TimelineEntry&) const = default;
};

struct ManifestComment {
  std::int64_t time_ms = 0;
  std::string text;
  bool operator==(const ManifestComment&) const = default;
};

struct TimelineManifest {
  int manifest_version = kManifestVersion;
  std::string video_ref;
  std::int64_t duration_ms = 0;
  bool toggle_default = true;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<TimelineEntry> entries;
  std::map<std::string, std::string> assets;               // line id -> path relative to the manifest
  std::map<std::string, std::string> notification_assets;  // "left" / "right" -> path
  std::vector<ManifestComment> comments;                   // flat list for the toggle-off view
  bool operator==(const TimelineManifest&) const = default;
};

struct TimelineConfig {
  double words_per_s = 3.0;
  text::WordCountMode word_count = text::WordCountMode::CjkChars;
};

namespace timeline {

inline std::string asset_path(const std::string& line_id) { return "assets/" + line_id + ".wav"; }
inline std::string notification_asset_path(NotifySide side) {
  return side == NotifySide::Left ? "assets/notify_left.wav" : "assets/notify_right.wav";
}

// rng() % 3 rather than a distribution: the standard pins mt19937_64's output
// but not the distributions', and manifests must match across platforms.
inline Tone draw_viewer_tone(std::mt19937_64& rng) { return static_cast<Tone>(1 + rng() % 3); }

/// Narrator line first when the topic has a description, then one viewer line
/// per comment. A viewer tone is re-drawn while it equals the previous line's
/// tone; `previous` carries that tone across topics sharing a point.
inline std::vector<DiscussionLine> build_script(const Topic& topic, std::mt19937_64& rng,
                                                std::optional<Tone> previous = std::nullopt,
                                                const TimelineConfig& config = {}) {
  std::vector<DiscussionLine> lines;
  const auto add = [&](Tone tone, const std::string& line_text) {
    DiscussionLine l;
    l.id = "t" + std::to_string(topic.id) + "-" + std::to_string(lines.size());
    l.topic_id = topic.id;
    l.tone = tone;
    l.text = line_text;
    l.est_duration_s = static_cast<double>(text::word_count(line_text, config.word_count)) / config.words_per_s;
    lines.push_back(std::move(l));
  };
  if (topic.visual_description) {
    add(Tone::Narrator, *topic.visual_description);
    previous = Tone::Narrator;
  }
  for (const auto& c : topic.comments) {
    Tone tone = draw_viewer_tone(rng);
    while (previous && tone == *previous) tone = draw_viewer_tone(rng);
    add(tone, c.text);
    previous = tone;
  }
  return lines;
}

inline std::vector<DiscussionLine> build_script(const Topic& topic, std::uint64_t seed,
                                                const TimelineConfig& config = {}) {
  std::mt19937_64 rng(seed);
  return build_script(topic, rng, std::nullopt, config);
}

namespace detail {

// Lays lines back to back. Boundaries are rounded from cumulative seconds so
// rounding never accumulates.
inline std::vector<DiscussionLine> lay_out(const std::vector<std::vector<DiscussionLine>>& scripts,
                                           double* total_s = nullptr) {
  std::vector<DiscussionLine> out;
  double cumulative = 0.0;
  for (const auto& script : scripts) {
    for (auto line : script) {
      const auto start = std::llround(cumulative * 1000.0);
      cumulative += line.est_duration_s;
      line.offset_ms = start;
      line.duration_ms = std::llround(cumulative * 1000.0) - start;
      out.push_back(std::move(line));
    }
  }
  if (total_s) *total_s = cumulative;
  return out;
}

}  // namespace detail

/// Auto-play entry for a gap point: lines run from the start of the gap's
/// insertable interval. Returns nothing when no topic was placed there.
inline std::optional<TimelineEntry> schedule_autoplay(const InsertionPoint& point,
                                                      const std::vector<std::vector<DiscussionLine>>& scripts,
                                                      const std::vector<int>& topic_ids = {}, int entry_id = 0) {
  if (point.kind != PointKind::NonSpeechGap) throw Error(ErrorCode::InvalidInput, "auto-play needs a gap point");
  if (scripts.empty()) return std::nullopt;
  TimelineEntry e;
  e.id = entry_id;
  e.kind = EntryKind::AutoPlay;
  e.point_id = point.id;
  e.time_ms = point.time_ms;
  e.topic_ids = topic_ids;
  double total = 0.0;
  e.lines = detail::lay_out(scripts, &total);
  if (total > point.capacity_s + optimizer::kEps || e.time_ms + e.total_ms() > point.end_ms) {
    throw Error(ErrorCode::CapacityViolation, "point " + std::to_string(point.id) + " holds " +
                                                  std::to_string(point.capacity_s) + " s, scripts need " +
                                                  std::to_string(total) + " s");
  }
  return e;
}

/// Where playback resumes after on-demand discussion: the first sentence after
/// the previous break in the same segment, or the segment's first sentence.
inline std::int64_t rewind_target(const SpeechBreak& brk, const std::vector<SpeechBreak>& breaks,
                                  const std::vector<Segment>& segments, const std::vector<TimedSentence>& sentences) {
  const SpeechBreak* previous = nullptr;
  for (const auto& b : breaks) {
    if (b.segment_id == brk.segment_id && b.time_ms < brk.time_ms && (!previous || b.time_ms > previous->time_ms)) {
      previous = &b;
    }
  }
  if (previous) return sentences.at(static_cast<std::size_t>(previous->following_sentence_id)).start_ms;
  for (const auto& s : segments) {
    if (s.id == brk.segment_id && !s.sentence_ids.empty()) {
      return sentences.at(static_cast<std::size_t>(s.sentence_ids.front())).start_ms;
    }
  }
  throw Error(ErrorCode::InvalidInput, "break " + std::to_string(brk.id) + " lies outside any speech segment");
}

inline std::optional<TimelineEntry> schedule_ondemand(const InsertionPoint& point,
                                                      const std::vector<std::vector<DiscussionLine>>& scripts,
                                                      const std::vector<SpeechBreak>& breaks,
                                                      const std::vector<Segment>& segments,
                                                      const std::vector<TimedSentence>& sentences,
                                                      const std::vector<int>& topic_ids = {}, int entry_id = 0) {
  if (point.kind != PointKind::SpeechBreakPoint || !point.break_id) {
    throw Error(ErrorCode::InvalidInput, "on-demand needs a speech break point");
  }
  if (scripts.empty()) return std::nullopt;
  const auto it = std::find_if(breaks.begin(), breaks.end(), [&](const SpeechBreak& b) { return b.id == *point.break_id; });
  if (it == breaks.end()) throw Error(ErrorCode::InvalidInput, "unknown break " + std::to_string(*point.break_id));
  TimelineEntry e;
  e.id = entry_id;
  e.kind = EntryKind::OnDemand;
  e.point_id = point.id;
  e.time_ms = point.time_ms;
  e.topic_ids = topic_ids;
  double total = 0.0;
  e.lines = detail::lay_out(scripts, &total);
  if (total > point.capacity_s + optimizer::kEps) {
    throw Error(ErrorCode::CapacityViolation, "break point " + std::to_string(point.id) + " over its pause budget");
  }
  e.notify_side = e.lines.front().narrator() ? NotifySide::Left : NotifySide::Right;
  e.rewind_target_ms = rewind_target(*it, breaks, segments, sentences);
  e.response_window_s = kResponseWindowS;
  return e;
}

struct TimelineInputs {
  const std::vector<Topic>& topics;
  const std::vector<InsertionPoint>& points;
  const Assignment& assignment;
  const std::vector<Segment>& segments;
  const std::vector<SpeechBreak>& breaks;
  const std::vector<TimedSentence>& sentences;
  const std::vector<DanmuComment>& comments;
};

/// Turns an assignment into the manifest. One generator seeded with `seed`
/// is consumed in point time order, so the tones depend only on the seed and
/// the assignment.
inline TimelineManifest build_manifest(const TimelineInputs& in, std::int64_t duration_ms, std::uint64_t seed,
                                       const TimelineConfig& config = {}, Warnings* warnings = nullptr) {
  TimelineManifest m;
  m.duration_ms = duration_ms;
  m.seed = seed;
  std::map<int, const Topic*> topic_by_id;
  for (const auto& t : in.topics) topic_by_id[t.id] = &t;

  std::vector<const InsertionPoint*> points;
  for (const auto& p : in.points) points.push_back(&p);
  std::stable_sort(points.begin(), points.end(), [](const InsertionPoint* a, const InsertionPoint* b) {
    return std::tie(a->time_ms, a->id) < std::tie(b->time_ms, b->id);
  });

  std::mt19937_64 rng(seed);
  std::optional<std::int64_t> last_notify;
  for (const auto* point : points) {
    const auto order = in.assignment.per_point_order.find(point->id);
    if (order == in.assignment.per_point_order.end() || order->second.empty()) continue;
    std::vector<std::vector<DiscussionLine>> scripts;
    std::optional<Tone> previous;
    for (int topic_id : order->second) {
      auto script = build_script(*topic_by_id.at(topic_id), rng, previous, config);
      if (!script.empty()) previous = script.back().tone;
      scripts.push_back(std::move(script));
    }
    const int entry_id = static_cast<int>(m.entries.size());
    std::optional<TimelineEntry> entry;
    if (point->kind == PointKind::NonSpeechGap) {
      entry = schedule_autoplay(*point, scripts, order->second, entry_id);
    } else {
      entry = schedule_ondemand(*point, scripts, in.breaks, in.segments, in.sentences, order->second, entry_id);
      if (last_notify && entry->time_ms < *last_notify + static_cast<std::int64_t>(kResponseWindowS * 1000) &&
          warnings) {
        warnings->add("notification at " + std::to_string(entry->time_ms) + " ms opens inside the previous window");
      }
      last_notify = entry->time_ms;
    }
    if (!entry) continue;
    for (const auto& l : entry->lines) m.assets[l.id] = asset_path(l.id);
    m.entries.push_back(std::move(*entry));
  }
  m.notification_assets = {{"left", notification_asset_path(NotifySide::Left)},
                           {"right", notification_asset_path(NotifySide::Right)}};
  auto comments = in.comments;
  std::stable_sort(comments.begin(), comments.end(), comment_before);
  for (const auto& c : comments) m.comments.push_back({c.video_time_ms, c.text});
  return m;
}

}  // namespace timeline

inline void to_json(nlohmann::json& j, const DiscussionLine& l) {
  j = {{"id", l.id},
       {"topic_id", l.topic_id},
       {"speaker", l.narrator() ? "narrator" : "viewer"},
       {"tone", std::string(providers::wire_name(l.tone))},
       {"text", l.text},
       {"est_duration_s", l.est_duration_s},
       {"offset_ms", l.offset_ms},
       {"duration_ms", l.duration_ms}};
}
inline void from_json(const nlohmann::json& j, DiscussionLine& l) {
  j.at("id").get_to(l.id);
  j.at("topic_id").get_to(l.topic_id);
  const auto tone = providers::parse_tone(j.at("tone").get<std::string>());
  if (!tone) throw Error(ErrorCode::InvalidInput, "unknown tone in line " + l.id);
  l.tone = *tone;
  j.at("text").get_to(l.text);
  j.at("est_duration_s").get_to(l.est_duration_s);
  j.at("offset_ms").get_to(l.offset_ms);
  j.at("duration_ms").get_to(l.duration_ms);
}

inline void to_json(nlohmann::json& j, const TimelineEntry& e) {
  j = {{"id", e.id}, {"kind", e.kind}, {"point_id", e.point_id}, {"topic_ids", e.topic_ids}, {"lines", e.lines}};
  if (e.kind == EntryKind::AutoPlay) {
    j["start_ms"] = e.time_ms;
  } else {
    j["notify_ms"] = e.time_ms;
    j["notify_side"] = e.notify_side.value_or(NotifySide::Right);
    j["rewind_target_ms"] = e.rewind_target_ms.value_or(e.time_ms);
    j["response_window_s"] = e.response_window_s.value_or(kResponseWindowS);
  }
}
inline void from_json(const nlohmann::json& j, TimelineEntry& e) {
  e = {};
  j.at("id").get_to(e.id);
  j.at("kind").get_to(e.kind);
  j.at("point_id").get_to(e.point_id);
  j.at("topic_ids").get_to(e.topic_ids);
  j.at("lines").get_to(e.lines);
  if (e.kind == EntryKind::AutoPlay) {
    j.at("start_ms").get_to(e.time_ms);
  } else {
    j.at("notify_ms").get_to(e.time_ms);
    e.notify_side = j.at("notify_side").get<NotifySide>();
    e.rewind_target_ms = j.at("rewind_target_ms").get<std::int64_t>();
    e.response_window_s = j.at("response_window_s").get<double>();
  }
}

inline void to_json(nlohmann::json& j, const TimelineManifest& m) {
  nlohmann::json comments = nlohmann::json::array();
  for (const auto& c : m.comments) comments.push_back({{"time_ms", c.time_ms}, {"text", c.text}});
  j = {{"manifest_version", m.manifest_version},
       {"video_ref", m.video_ref},
       {"duration_ms", m.duration_ms},
       {"toggle_default", m.toggle_default},
       {"config_hash", m.config_hash},
       {"seed", m.seed},
       {"entries", m.entries},
       {"assets", m.assets},
       {"notification_assets", m.notification_assets},
       {"comments", comments}};
}
inline void from_json(const nlohmann::json& j, TimelineManifest& m) {
  m = {};
  j.at("manifest_version").get_to(m.manifest_version);
  if (m.manifest_version != kManifestVersion) {
    throw Error(ErrorCode::InvalidInput, "unsupported manifest_version " + std::to_string(m.manifest_version));
  }
  j.at("video_ref").get_to(m.video_ref);
  j.at("duration_ms").get_to(m.duration_ms);
  j.at("toggle_default").get_to(m.toggle_default);
  j.at("config_hash").get_to(m.config_hash);
  j.at("seed").get_to(m.seed);
  j.at("entries").get_to(m.entries);
  j.at("assets").get_to(m.assets);
  j.at("notification_assets").get_to(m.notification_assets);
  for (const auto& c : j.at("comments")) m.comments.push_back({c.at("time_ms").get<std::int64_t>(), c.at("text").get<std::string>()});
}

}  // namespace commentcast
