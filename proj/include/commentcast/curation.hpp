#pragma once

#include "commentcast/error.hpp"
#include "commentcast/ingest/types.hpp"
#include "commentcast/providers/offline.hpp"
#include "commentcast/providers/providers.hpp"
#include "commentcast/segmentation.hpp"
#include "commentcast/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace commentcast {

struct TopicScores {
  double s_info = 0.0;
  double s_creativity = 0.0;
  double s_diversity = 0.0;
  double tq = 0.0;
  bool operator==(const TopicScores&) const = default;
};

struct Topic {
  int id = 0;
  int segment_id = 0;
  std::string summary;
  std::vector<DanmuComment> comments;  // dialogue order
  std::optional<std::string> visual_description;
  double length_s = 0.0;
  TopicScores scores;

  // Text the scorers see: the comments joined in dialogue order.
  std::string text() const {
    std::vector<std::string> parts;
    parts.reserve(comments.size());
    for (const auto& c : comments) parts.push_back(c.text);
    return text::join(parts, " ");
  }

  std::int64_t first_comment_ms() const {
    std::int64_t first = comments.empty() ? 0 : comments.front().video_time_ms;
    for (const auto& c : comments) first = std::min(first, c.video_time_ms);
    return first;
  }
};

struct CurationConfig {
  double words_per_s = 3.0;
  std::size_t max_description_words = 15;
  double duplicate_description_cosine = 0.9;
  text::WordCountMode word_count = text::WordCountMode::CjkChars;
};

namespace curation {

/// Speaking time of a topic: comment words (plus description words) divided
/// by the speaking rate. Counts are summed per comment so the result equals
/// the sum of the scripted lines' estimates.
inline double topic_length_s(const std::vector<DanmuComment>& comments,
                             const std::optional<std::string>& description, double words_per_s = 3.0,
                             text::WordCountMode mode = text::WordCountMode::CjkChars) {
  std::size_t words = 0;
  for (const auto& c : comments) words += text::word_count(c.text, mode);
  if (description) words += text::word_count(*description, mode);
  return static_cast<double>(words) / words_per_s;
}

inline void recompute_length(Topic& topic, const CurationConfig& config = {}) {
  topic.length_s = topic_length_s(topic.comments, topic.visual_description, config.words_per_s, config.word_count);
}

/// Buckets comments by the segment containing their video time. A time on a
/// boundary goes to the later segment; the video end goes to the last one.
/// Comments outside [0, duration] are counted in `out_of_range` and dropped.
inline std::map<int, std::vector<DanmuComment>> assign_comments(const std::vector<DanmuComment>& comments,
                                                                const std::vector<Segment>& segments,
                                                                std::size_t* out_of_range = nullptr) {
  std::map<int, std::vector<DanmuComment>> out;
  for (const auto& s : segments) out[s.id];
  std::size_t dropped = 0;
  for (const auto& c : comments) {
    const auto it = std::upper_bound(segments.begin(), segments.end(), c.video_time_ms,
                                     [](std::int64_t t, const Segment& s) { return t < s.start_ms; });
    if (it == segments.begin() || segments.empty()) {
      ++dropped;
      continue;
    }
    const auto& seg = *std::prev(it);
    const bool last = &seg == &segments.back();
    if (c.video_time_ms < seg.end_ms || (last && c.video_time_ms == seg.end_ms)) {
      out[seg.id].push_back(c);
    } else {
      ++dropped;
    }
  }
  if (out_of_range) *out_of_range = dropped;
  return out;
}

/// Clusters one segment's comments into topics. Ids are left at 0; lengths
/// are computed from the raw members.
inline std::vector<Topic> group_topics(int segment_id, const std::vector<DanmuComment>& comments,
                                       const providers::Providers& providers, const CurationConfig& config = {},
                                       std::size_t* untopiced = nullptr) {
  std::vector<Topic> topics;
  if (comments.empty()) {
    if (untopiced) *untopiced = 0;
    return topics;
  }
  std::size_t covered = 0;
  for (auto& proposal : providers.topic_model(comments)) {
    Topic t;
    t.segment_id = segment_id;
    t.summary = proposal.summary;
    std::sort(proposal.members.begin(), proposal.members.end());
    for (auto m : proposal.members) t.comments.push_back(comments[m]);
    covered += t.comments.size();
    recompute_length(t, config);
    topics.push_back(std::move(t));
  }
  if (untopiced) *untopiced = comments.size() - covered;
  return topics;
}

/// Drops exact duplicates (case and whitespace folded), keeping the earliest,
/// then asks the reorder provider for dialogue order. Returns the number of
/// comments removed through `removed`.
inline Topic dedupe_and_order(Topic topic, const providers::Providers& providers, const CurationConfig& config = {},
                              std::size_t* removed = nullptr) {
  if (topic.comments.empty()) throw Error(ErrorCode::InvalidInput, "dedupe_and_order on an empty topic");
  auto sorted = topic.comments;
  std::stable_sort(sorted.begin(), sorted.end(), comment_before);
  std::vector<DanmuComment> unique;
  std::set<std::string> seen;
  for (auto& c : sorted) {
    if (seen.insert(text::normalize_for_dedup(c.text)).second) unique.push_back(std::move(c));
  }
  const std::size_t before = topic.comments.size();
  std::vector<DanmuComment> ordered;
  for (auto i : providers.dialogue_reorder(topic.summary, unique)) ordered.push_back(unique[i]);
  topic.comments = std::move(ordered);
  recompute_length(topic, config);
  if (removed) *removed = before - topic.comments.size();
  return topic;
}

/// Attaches visual descriptions to the topics of one segment.
///
/// `keyframes` must already be restricted to the segment. Without keyframes no
/// provider call is made. Long answers are cut to the word limit; a
/// description too close to an earlier one in the same segment is dropped.
inline void describe_visual(std::vector<Topic>& topics, const std::vector<KeyframeRef>& keyframes,
                            const providers::Providers& providers, const CurationConfig& config = {},
                            Warnings* warnings = nullptr) {
  for (auto& t : topics) t.visual_description.reset();
  if (topics.empty() || keyframes.empty()) {
    for (auto& t : topics) recompute_length(t, config);
    return;
  }
  std::vector<providers::TopicForDescription> request;
  for (const auto& t : topics) {
    providers::TopicForDescription d;
    d.summary = t.summary;
    for (const auto& c : t.comments) d.comments.push_back(c.text);
    request.push_back(std::move(d));
  }
  const auto answers = providers.visual_describe(request, keyframes);
  std::vector<std::vector<double>> kept;
  for (std::size_t i = 0; i < topics.size(); ++i) {
    auto& topic = topics[i];
    if (!answers[i]) continue;
    std::string description(text::trim(*answers[i]));
    if (text::word_count(description, config.word_count) > config.max_description_words) {
      description = text::truncate_words(description, config.max_description_words, config.word_count);
      if (warnings) {
        warnings->add("topic '" + topic.summary + "': visual description cut to " +
                      std::to_string(config.max_description_words) + " words");
      }
    }
    auto vec = providers.embed(description);
    const bool duplicate = std::any_of(kept.begin(), kept.end(), [&](const std::vector<double>& other) {
      return providers::offline::cosine(vec, other) >= config.duplicate_description_cosine;
    });
    if (duplicate) continue;
    kept.push_back(std::move(vec));
    topic.visual_description = std::move(description);
  }
  for (auto& t : topics) recompute_length(t, config);
}

inline std::vector<KeyframeRef> keyframes_in(const Segment& segment, const std::vector<KeyframeRef>& keyframes) {
  std::vector<KeyframeRef> out;
  for (const auto& k : keyframes) {
    if (k.time_ms >= segment.start_ms && k.time_ms < segment.end_ms) out.push_back(k);
  }
  return out;
}

struct SegmentReport {
  int segment_id = 0;
  std::size_t assigned = 0;
  std::size_t untopiced = 0;
  std::size_t duplicates_removed = 0;
};

inline void to_json(nlohmann::json& j, const SegmentReport& r) {
  j = {{"segment_id", r.segment_id},
       {"assigned", r.assigned},
       {"untopiced", r.untopiced},
       {"duplicates_removed", r.duplicates_removed}};
}

struct CurationResult {
  std::vector<Topic> topics;  // ids follow segment order, then provider order
  std::vector<SegmentReport> reports;
  std::size_t out_of_range = 0;
};

inline CurationResult curate(const std::vector<Segment>& segments, const std::vector<DanmuComment>& comments,
                             const std::vector<KeyframeRef>& keyframes, const providers::Providers& providers,
                             const CurationConfig& config = {}, Warnings* warnings = nullptr) {
  CurationResult result;
  const auto buckets = assign_comments(comments, segments, &result.out_of_range);
  if (result.out_of_range > 0 && warnings) {
    warnings->add(std::to_string(result.out_of_range) + " comments fall outside the video and were dropped");
  }
  for (const auto& segment : segments) {
    const auto& bucket = buckets.at(segment.id);
    SegmentReport report;
    report.segment_id = segment.id;
    report.assigned = bucket.size();
    auto topics = group_topics(segment.id, bucket, providers, config, &report.untopiced);
    for (auto& t : topics) {
      std::size_t removed = 0;
      t = dedupe_and_order(std::move(t), providers, config, &removed);
      report.duplicates_removed += removed;
    }
    describe_visual(topics, keyframes_in(segment, keyframes), providers, config, warnings);
    if (report.untopiced > 0 && warnings) {
      warnings->add("segment " + std::to_string(segment.id) + ": " + std::to_string(report.untopiced) +
                    " comments left out of every topic");
    }
    for (auto& t : topics) {
      t.id = static_cast<int>(result.topics.size());
      result.topics.push_back(std::move(t));
    }
    result.reports.push_back(report);
  }
  return result;
}

}  // namespace curation

inline void to_json(nlohmann::json& j, const TopicScores& s) {
  j = {{"s_info", s.s_info}, {"s_creativity", s.s_creativity}, {"s_diversity", s.s_diversity}, {"tq", s.tq}};
}
inline void from_json(const nlohmann::json& j, TopicScores& s) {
  j.at("s_info").get_to(s.s_info);
  j.at("s_creativity").get_to(s.s_creativity);
  j.at("s_diversity").get_to(s.s_diversity);
  j.at("tq").get_to(s.tq);
}

inline void to_json(nlohmann::json& j, const Topic& t) {
  j = {{"id", t.id},
       {"segment_id", t.segment_id},
       {"summary", t.summary},
       {"comments", t.comments},
       {"visual_description", t.visual_description ? nlohmann::json(*t.visual_description) : nlohmann::json(nullptr)},
       {"length_s", t.length_s},
       {"scores", t.scores}};
}
inline void from_json(const nlohmann::json& j, Topic& t) {
  j.at("id").get_to(t.id);
  j.at("segment_id").get_to(t.segment_id);
  j.at("summary").get_to(t.summary);
  j.at("comments").get_to(t.comments);
  t.visual_description.reset();
  if (const auto& d = j.at("visual_description"); !d.is_null()) t.visual_description = d.get<std::string>();
  j.at("length_s").get_to(t.length_s);
  if (j.contains("scores")) j.at("scores").get_to(t.scores);
}


}  // namespace commentcast
