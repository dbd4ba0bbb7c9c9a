#pragma once

#include "commentcast/error.hpp"
#include "commentcast/ingest/types.hpp"
#include "commentcast/providers/providers.hpp"
#include "commentcast/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace commentcast {

enum class SegmentKind { Speech, NonSpeech };

NLOHMANN_JSON_SERIALIZE_ENUM(SegmentKind, {{SegmentKind::Speech, "speech"}, {SegmentKind::NonSpeech, "non_speech"}})

// Segments tile [0, duration]. sentence_ids are positions in the sorted
// transcript, empty for non-speech.
struct Segment {
  int id = 0;
  SegmentKind kind = SegmentKind::Speech;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  std::vector<int> sentence_ids;

  std::int64_t midpoint_ms() const { return start_ms + (end_ms - start_ms) / 2; }
  bool operator==(const Segment&) const = default;
};

struct SpeechBreak {
  int id = 0;
  int segment_id = 0;
  std::int64_t time_ms = 0;  // end of the chunk's last sentence
  int preceding_sentence_id = 0;
  int following_sentence_id = 0;
  bool operator==(const SpeechBreak&) const = default;
};

struct Interval {
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  std::int64_t length_ms() const { return end_ms - start_ms; }
  bool operator==(const Interval&) const = default;
};

enum class PointKind { NonSpeechGap, SpeechBreakPoint };

NLOHMANN_JSON_SERIALIZE_ENUM(PointKind, {{PointKind::NonSpeechGap, "non_speech_gap"},
                                         {PointKind::SpeechBreakPoint, "speech_break"}})

struct InsertionPoint {
  int id = 0;
  PointKind kind = PointKind::NonSpeechGap;
  std::int64_t time_ms = 0;
  std::int64_t end_ms = 0;  // end of the insertable interval; equals time_ms for breaks
  double capacity_s = 0.0;
  int segment_id = 0;
  std::optional<int> break_id;
  std::string context_before;
  std::string context_after;
  bool operator==(const InsertionPoint&) const = default;
};

struct SegmentationConfig {
  std::int64_t gap_threshold_ms = 2000;
  double volume_threshold = 0.8;
  std::int64_t min_interval_ms = 500;
  std::size_t min_chunk_words = 20;
  double break_capacity_s = 10.0;
  text::WordCountMode word_count = text::WordCountMode::CjkChars;
};

namespace segmentation {

/// Splits the timeline at every silence longer than the gap threshold.
///
/// Gaps at the start and end of the video count too. Shorter gaps are absorbed
/// into the neighbouring speech segment so the result always tiles
/// [0, duration_ms].
inline std::vector<Segment> find_segments(const std::vector<TimedSentence>& sentences, std::int64_t duration_ms,
                                          std::int64_t gap_threshold_ms = 2000) {
  if (!sentences.empty() && sentences.back().end_ms > duration_ms) {
    throw Error(ErrorCode::DurationMismatch, "last sentence ends at " + std::to_string(sentences.back().end_ms) +
                                                 " ms, after the " + std::to_string(duration_ms) + " ms video");
  }
  std::vector<Segment> segments;
  const auto push = [&](SegmentKind kind, std::int64_t start, std::int64_t end) {
    Segment s;
    s.id = static_cast<int>(segments.size());
    s.kind = kind;
    s.start_ms = start;
    s.end_ms = end;
    segments.push_back(std::move(s));
  };
  if (sentences.empty()) {
    push(SegmentKind::NonSpeech, 0, duration_ms);
    return segments;
  }

  std::int64_t cursor = 0;
  std::size_t i = 0;
  while (i < sentences.size()) {
    if (sentences[i].start_ms - cursor > gap_threshold_ms) {
      push(SegmentKind::NonSpeech, cursor, sentences[i].start_ms);
      cursor = sentences[i].start_ms;
    }
    Segment speech;
    speech.kind = SegmentKind::Speech;
    speech.start_ms = cursor;
    speech.sentence_ids.push_back(static_cast<int>(i));
    while (i + 1 < sentences.size() && sentences[i + 1].start_ms - sentences[i].end_ms <= gap_threshold_ms) {
      ++i;
      speech.sentence_ids.push_back(static_cast<int>(i));
    }
    speech.end_ms = sentences[i].end_ms;
    if (i + 1 == sentences.size() && duration_ms - speech.end_ms <= gap_threshold_ms) speech.end_ms = duration_ms;
    speech.id = static_cast<int>(segments.size());
    cursor = speech.end_ms;
    segments.push_back(std::move(speech));
    ++i;
  }
  if (cursor < duration_ms) push(SegmentKind::NonSpeech, cursor, duration_ms);
  return segments;
}

/// Removes every envelope window louder than `threshold` from a non-speech
/// segment. Leftover pieces shorter than `min_interval_ms` are dropped.
inline std::vector<Interval> exclude_high_volume(const Segment& segment, const VolumeEnvelope& envelope,
                                                 double threshold = 0.8, std::int64_t min_interval_ms = 500) {
  if (segment.kind != SegmentKind::NonSpeech) {
    throw Error(ErrorCode::InvalidInput, "exclude_high_volume expects a non-speech segment");
  }
  std::vector<Interval> loud;
  for (std::size_t k = 0; k < envelope.rms.size(); ++k) {
    if (envelope.rms[k] <= threshold) continue;
    const auto [start, end] = envelope.window_span_ms(k);
    if (end <= segment.start_ms || start >= segment.end_ms) continue;
    if (!loud.empty() && start <= loud.back().end_ms) {
      loud.back().end_ms = std::max(loud.back().end_ms, end);
    } else {
      loud.push_back({start, end});
    }
  }
  std::vector<Interval> out;
  std::int64_t cursor = segment.start_ms;
  const auto emit = [&](std::int64_t from, std::int64_t to) {
    if (to - from >= min_interval_ms && to > from) out.push_back({from, to});
  };
  for (const auto& l : loud) {
    emit(cursor, std::min(l.start_ms, segment.end_ms));
    cursor = std::max(cursor, l.end_ms);
  }
  emit(cursor, segment.end_ms);
  return out;
}

/// Finds the speech breaks inside one speech segment.
///
/// The splitter proposes boundaries; a proposal is kept only once the chunk it
/// closes holds at least `min_chunk_words` words, otherwise the chunk merges
/// into the next one. Chunk ends become breaks except the last, which is
/// followed by non-speech or the end of the video (unless `next` is speech).
inline std::vector<SpeechBreak> detect_breaks(const Segment& segment, const std::vector<TimedSentence>& sentences,
                                              const providers::Providers& splitter,
                                              const SegmentationConfig& config = {},
                                              const Segment* next = nullptr, int first_break_id = 0) {
  if (segment.kind != SegmentKind::Speech) throw Error(ErrorCode::InvalidInput, "detect_breaks expects a speech segment");
  const auto& ids = segment.sentence_ids;
  std::vector<SpeechBreak> breaks;
  if (ids.empty()) return breaks;

  std::vector<std::size_t> proposals;
  if (ids.size() > 1) {
    std::vector<std::string> texts;
    texts.reserve(ids.size());
    for (int id : ids) texts.push_back(sentences.at(static_cast<std::size_t>(id)).text);
    try {
      proposals = splitter.segment_split(texts);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ProviderFailure) throw;
      throw Error(ErrorCode::ProviderFailure, "segment " + std::to_string(segment.id) + ": " + e.what());
    }
  }

  const auto make_break = [&](std::size_t local) {
    SpeechBreak b;
    b.id = first_break_id + static_cast<int>(breaks.size());
    b.segment_id = segment.id;
    b.preceding_sentence_id = ids[local];
    b.following_sentence_id = ids[local] + 1;
    b.time_ms = sentences.at(static_cast<std::size_t>(ids[local])).end_ms;
    return b;
  };

  std::size_t words = 0;
  std::size_t next_proposal = 0;
  for (std::size_t local = 0; local < ids.size(); ++local) {
    words += text::word_count(sentences.at(static_cast<std::size_t>(ids[local])).text, config.word_count);
    while (next_proposal < proposals.size() && proposals[next_proposal] < local) ++next_proposal;
    const bool proposed = next_proposal < proposals.size() && proposals[next_proposal] == local;
    if (proposed && local + 1 < ids.size() && words >= config.min_chunk_words) {
      breaks.push_back(make_break(local));
      words = 0;
    }
  }
  if (next && next->kind == SegmentKind::Speech && words >= config.min_chunk_words &&
      static_cast<std::size_t>(ids.back()) + 1 < sentences.size()) {
    breaks.push_back(make_break(ids.size() - 1));
  }
  return breaks;
}

namespace detail {

inline const TimedSentence* last_sentence_ending_by(const std::vector<TimedSentence>& sentences, std::int64_t t) {
  const TimedSentence* found = nullptr;
  for (const auto& s : sentences) {
    if (s.end_ms <= t) found = &s;
    else break;
  }
  return found;
}

inline const TimedSentence* first_sentence_starting_from(const std::vector<TimedSentence>& sentences, std::int64_t t) {
  for (const auto& s : sentences) {
    if (s.start_ms >= t) return &s;
  }
  return nullptr;
}

inline int segment_containing(const std::vector<Segment>& segments, std::int64_t t) {
  for (const auto& s : segments) {
    if (t >= s.start_ms && t < s.end_ms) return s.id;
  }
  return segments.empty() ? 0 : segments.back().id;
}

}  // namespace detail

/// One gap point per insertable interval (capacity = its length) and one
/// break point per speech break (fixed capacity), sorted by time.
inline std::vector<InsertionPoint> build_insertion_points(const std::vector<Segment>& segments,
                                                          const std::vector<SpeechBreak>& breaks,
                                                          const std::vector<Interval>& insertable,
                                                          const std::vector<TimedSentence>& sentences,
                                                          double break_capacity_s = 10.0) {
  std::vector<InsertionPoint> points;
  for (const auto& iv : insertable) {
    InsertionPoint p;
    p.kind = PointKind::NonSpeechGap;
    p.time_ms = iv.start_ms;
    p.end_ms = iv.end_ms;
    p.capacity_s = static_cast<double>(iv.length_ms()) / 1000.0;
    p.segment_id = detail::segment_containing(segments, iv.start_ms);
    if (const auto* s = detail::last_sentence_ending_by(sentences, iv.start_ms)) p.context_before = s->text;
    if (const auto* s = detail::first_sentence_starting_from(sentences, iv.start_ms)) p.context_after = s->text;
    points.push_back(std::move(p));
  }
  for (const auto& b : breaks) {
    InsertionPoint p;
    p.kind = PointKind::SpeechBreakPoint;
    p.time_ms = b.time_ms;
    p.end_ms = b.time_ms;
    p.capacity_s = break_capacity_s;
    p.segment_id = b.segment_id;
    p.break_id = b.id;
    const auto before = static_cast<std::size_t>(b.preceding_sentence_id);
    const auto after = static_cast<std::size_t>(b.following_sentence_id);
    if (before < sentences.size()) p.context_before = sentences[before].text;
    if (after < sentences.size()) p.context_after = sentences[after].text;
    points.push_back(std::move(p));
  }
  std::stable_sort(points.begin(), points.end(),
                   [](const InsertionPoint& a, const InsertionPoint& b) { return a.time_ms < b.time_ms; });
  for (std::size_t i = 0; i < points.size(); ++i) points[i].id = static_cast<int>(i);
  return points;
}

struct SegmentationResult {
  std::vector<Segment> segments;
  std::vector<SpeechBreak> breaks;
  std::vector<Interval> insertable;  // after high-volume exclusion, all gaps
  std::vector<InsertionPoint> points;
};

// Runs the four steps above in order.
inline SegmentationResult segment_video(const std::vector<TimedSentence>& sentences, const VolumeEnvelope& envelope,
                                        std::int64_t duration_ms, const providers::Providers& splitter,
                                        const SegmentationConfig& config = {}) {
  SegmentationResult r;
  r.segments = find_segments(sentences, duration_ms, config.gap_threshold_ms);
  for (std::size_t i = 0; i < r.segments.size(); ++i) {
    const auto& seg = r.segments[i];
    if (seg.kind == SegmentKind::NonSpeech) {
      auto pieces = exclude_high_volume(seg, envelope, config.volume_threshold, config.min_interval_ms);
      r.insertable.insert(r.insertable.end(), pieces.begin(), pieces.end());
    } else {
      const Segment* next = i + 1 < r.segments.size() ? &r.segments[i + 1] : nullptr;
      auto found = detect_breaks(seg, sentences, splitter, config, next, static_cast<int>(r.breaks.size()));
      r.breaks.insert(r.breaks.end(), found.begin(), found.end());
    }
  }
  r.points = build_insertion_points(r.segments, r.breaks, r.insertable, sentences, config.break_capacity_s);
  return r;
}

}  // namespace segmentation

inline void to_json(nlohmann::json& j, const Segment& s) {
  j = {{"id", s.id}, {"kind", s.kind}, {"start_ms", s.start_ms}, {"end_ms", s.end_ms}, {"sentence_ids", s.sentence_ids}};
}
inline void from_json(const nlohmann::json& j, Segment& s) {
  j.at("id").get_to(s.id);
  j.at("kind").get_to(s.kind);
  j.at("start_ms").get_to(s.start_ms);
  j.at("end_ms").get_to(s.end_ms);
  j.at("sentence_ids").get_to(s.sentence_ids);
}

inline void to_json(nlohmann::json& j, const SpeechBreak& b) {
  j = {{"id", b.id},
       {"segment_id", b.segment_id},
       {"time_ms", b.time_ms},
       {"preceding_sentence_id", b.preceding_sentence_id},
       {"following_sentence_id", b.following_sentence_id}};
}
inline void from_json(const nlohmann::json& j, SpeechBreak& b) {
  j.at("id").get_to(b.id);
  j.at("segment_id").get_to(b.segment_id);
  j.at("time_ms").get_to(b.time_ms);
  j.at("preceding_sentence_id").get_to(b.preceding_sentence_id);
  j.at("following_sentence_id").get_to(b.following_sentence_id);
}

inline void to_json(nlohmann::json& j, const Interval& i) { j = {{"start_ms", i.start_ms}, {"end_ms", i.end_ms}}; }
inline void from_json(const nlohmann::json& j, Interval& i) {
  j.at("start_ms").get_to(i.start_ms);
  j.at("end_ms").get_to(i.end_ms);
}

inline void to_json(nlohmann::json& j, const InsertionPoint& p) {
  j = {{"id", p.id},
       {"kind", p.kind},
       {"time_ms", p.time_ms},
       {"end_ms", p.end_ms},
       {"capacity_s", p.capacity_s},
       {"segment_id", p.segment_id},
       {"break_id", p.break_id ? nlohmann::json(*p.break_id) : nlohmann::json(nullptr)},
       {"context_before", p.context_before},
       {"context_after", p.context_after}};
}
inline void from_json(const nlohmann::json& j, InsertionPoint& p) {
  j.at("id").get_to(p.id);
  j.at("kind").get_to(p.kind);
  j.at("time_ms").get_to(p.time_ms);
  j.at("end_ms").get_to(p.end_ms);
  j.at("capacity_s").get_to(p.capacity_s);
  j.at("segment_id").get_to(p.segment_id);
  p.break_id.reset();
  if (const auto& b = j.at("break_id"); !b.is_null()) p.break_id = b.get<int>();
  j.at("context_before").get_to(p.context_before);
  j.at("context_after").get_to(p.context_after);
}

}  // namespace commentcast
