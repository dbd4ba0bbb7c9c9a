#pragma once

#include "commentcast/curation.hpp"
#include "commentcast/error.hpp"
#include "commentcast/ingest/types.hpp"
#include "commentcast/providers/engine.hpp"
#include "commentcast/providers/offline.hpp"
#include "commentcast/providers/providers.hpp"
#include "commentcast/segmentation.hpp"
#include "commentcast/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace commentcast {

struct ScoringConfig {
  double lambda_info = 1.0;
  double lambda_creativity = 1.0;
  double lambda_diversity = 1.0;
  double lambda_pause = 0.25;
  double lambda = 10.0;  // weight of IQ against TQ in the placement reward
  double max_pause_s = 10.0;
  double words_per_s = 3.0;

  void validate() const {
    for (double v : {lambda_info, lambda_creativity, lambda_diversity, lambda_pause, lambda, max_pause_s, words_per_s}) {
      if (!(v > 0.0)) throw Error(ErrorCode::InvalidConfig, "scoring weights and rates must be positive");
    }
  }
};

struct InsertionScore {
  int topic_id = 0;
  int point_id = 0;
  double raw_logprob = 0.0;
  double s_cohe = 0.0;
  double s_pause = 0.0;
  double iq = 0.0;
  bool operator==(const InsertionScore&) const = default;
};

namespace scoring {

inline double informativeness_from_similarity(double cosine) { return std::clamp(1.0 - cosine, 0.0, 1.0); }

// An empty transcript (music, silence) makes any comment maximally novel.
inline double informativeness(std::string_view topic_text, std::string_view transcript,
                              const providers::Providers& providers) {
  if (text::is_blank(transcript)) return 1.0;
  const auto a = providers.embed(topic_text);
  const auto b = providers.embed(transcript);
  return informativeness_from_similarity(providers::offline::cosine(a, b));
}

inline double creativity(int rating) { return static_cast<double>(rating) / 10.0; }

inline double diversity(std::span<const providers::Sentiment> labels) {
  if (labels.empty()) throw Error(ErrorCode::InvalidInput, "diversity of an empty topic");
  const std::set<providers::Sentiment> distinct(labels.begin(), labels.end());
  return static_cast<double>(distinct.size()) / 3.0;
}

inline double topic_quality(double s_info, double s_creativity, double s_diversity, const ScoringConfig& c = {}) {
  return c.lambda_info * s_info + c.lambda_creativity * s_creativity + c.lambda_diversity * s_diversity;
}

/// Min-max normalization within one topic's candidates. One value, or all
/// values equal, maps to 1.0 everywhere.
inline std::vector<double> min_max(std::span<const double> raw) {
  std::vector<double> out(raw.size(), 1.0);
  if (raw.size() < 2) return out;
  const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
  if (!(*hi > *lo)) return out;
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = (raw[i] - *lo) / (*hi - *lo);
  return out;
}

// Only speech breaks pause the video, so gaps carry no penalty.
inline double pause_score(double topic_length_s, PointKind kind, const ScoringConfig& c = {}) {
  if (kind == PointKind::NonSpeechGap) return 0.0;
  return std::min(topic_length_s / c.max_pause_s, 1.0);
}

inline double insertion_quality(double s_cohe, double s_pause, const ScoringConfig& c = {}) {
  return s_cohe - c.lambda_pause * s_pause;
}

inline double reward(double tq, double iq, const ScoringConfig& c = {}) { return tq + c.lambda * iq; }

inline std::string segment_transcript(const Segment& segment, const std::vector<TimedSentence>& sentences) {
  std::vector<std::string> parts;
  for (int id : segment.sentence_ids) parts.push_back(sentences.at(static_cast<std::size_t>(id)).text);
  return text::join(parts, " ");
}

inline TopicScores score_topic(const Topic& topic, std::string_view transcript, const providers::Providers& providers,
                               const ScoringConfig& config = {}) {
  TopicScores s;
  const auto body = topic.text();
  s.s_info = informativeness(body, transcript, providers);
  s.s_creativity = creativity(providers.rate_creativity(body));
  std::vector<providers::Sentiment> labels;
  for (const auto& c : topic.comments) labels.push_back(providers.sentiment(c.text));
  s.s_diversity = diversity(labels);
  s.tq = topic_quality(s.s_info, s.s_creativity, s.s_diversity, config);
  return s;
}

inline void score_topics(std::vector<Topic>& topics, const std::vector<Segment>& segments,
                         const std::vector<TimedSentence>& sentences, const providers::Providers& providers,
                         const ScoringConfig& config = {}) {
  std::map<int, std::string> transcripts;
  for (const auto& s : segments) transcripts[s.id] = segment_transcript(s, sentences);
  for (auto& t : topics) t.scores = score_topic(t, transcripts.at(t.segment_id), providers, config);
}

/// Coherence and pause scores for one topic over its candidate points, in the
/// order given.
inline std::vector<InsertionScore> score_insertions(const Topic& topic, const std::vector<const InsertionPoint*>& candidates,
                                                    const providers::Providers& providers,
                                                    const ScoringConfig& config = {}) {
  if (candidates.empty()) throw Error(ErrorCode::NoCandidates, "topic " + std::to_string(topic.id) + " has no candidates");
  const auto body = topic.text();
  std::vector<double> raw;
  for (const auto* p : candidates) raw.push_back(providers.logprob(p->context_before, body, p->context_after));
  const auto cohe = min_max(raw);
  std::vector<InsertionScore> out;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    InsertionScore s;
    s.topic_id = topic.id;
    s.point_id = candidates[k]->id;
    s.raw_logprob = raw[k];
    s.s_cohe = cohe[k];
    s.s_pause = pause_score(topic.length_s, candidates[k]->kind, config);
    s.iq = insertion_quality(s.s_cohe, s.s_pause, config);
    out.push_back(s);
  }
  return out;
}

}  // namespace scoring

inline void to_json(nlohmann::json& j, const InsertionScore& s) {
  j = {{"topic_id", s.topic_id}, {"point_id", s.point_id}, {"raw_logprob", s.raw_logprob},
       {"s_cohe", s.s_cohe},     {"s_pause", s.s_pause},   {"iq", s.iq}};
}
inline void from_json(const nlohmann::json& j, InsertionScore& s) {
  j.at("topic_id").get_to(s.topic_id);
  j.at("point_id").get_to(s.point_id);
  j.at("raw_logprob").get_to(s.raw_logprob);
  j.at("s_cohe").get_to(s.s_cohe);
  j.at("s_pause").get_to(s.s_pause);
  j.at("iq").get_to(s.iq);
}

inline void to_json(nlohmann::json& j, const ScoringConfig& c) {
  j = {{"lambda_info", c.lambda_info},   {"lambda_creativity", c.lambda_creativity},
       {"lambda_diversity", c.lambda_diversity}, {"lambda_pause", c.lambda_pause},
       {"lambda", c.lambda},             {"max_pause_s", c.max_pause_s},
       {"words_per_s", c.words_per_s}};
}
inline void from_json(const nlohmann::json& j, ScoringConfig& c) {
  c.lambda_info = j.value("lambda_info", c.lambda_info);
  c.lambda_creativity = j.value("lambda_creativity", c.lambda_creativity);
  c.lambda_diversity = j.value("lambda_diversity", c.lambda_diversity);
  c.lambda_pause = j.value("lambda_pause", c.lambda_pause);
  c.lambda = j.value("lambda", c.lambda);
  c.max_pause_s = j.value("max_pause_s", c.max_pause_s);
  c.words_per_s = j.value("words_per_s", c.words_per_s);
}

}  // namespace commentcast
