#pragma once

// Randomized end-to-end planning runs with the offline engine, and a checker
// for the schedule properties every manifest must satisfy.

#include "commentcast/pipeline.hpp"

#include "support.hpp"

#include <random>
#include <string>
#include <vector>

namespace testing_support {

struct RandomPipeline {
  std::int64_t duration_ms = 0;
  std::vector<commentcast::TimedSentence> sentences;
  std::vector<commentcast::DanmuComment> comments;
  commentcast::VolumeEnvelope envelope;
  commentcast::segmentation::SegmentationResult seg;
  std::vector<commentcast::Topic> topics;
  commentcast::pipeline::PlanResult plan;
};

// Envelope with mostly quiet windows and occasional loud runs.
inline commentcast::VolumeEnvelope random_envelope(std::mt19937_64& rng, std::int64_t duration_ms) {
  commentcast::VolumeEnvelope env;
  env.duration_ms = duration_ms;
  const auto windows = static_cast<std::size_t>((duration_ms + 249) / 250);
  env.rms.resize(windows);
  for (std::size_t k = 0; k < windows;) {
    const bool loud = rng() % 10 == 0;
    const auto run = static_cast<std::size_t>(uniform_int(rng, 1, 12));
    for (std::size_t i = 0; i < run && k < windows; ++i, ++k) {
      env.rms[k] = loud ? uniform_real(rng, 0.81, 1.0) : uniform_real(rng, 0.0, 0.5);
    }
  }
  return env;
}

inline RandomPipeline random_pipeline(std::mt19937_64& rng, const commentcast::providers::Providers& providers) {
  using namespace commentcast;
  RandomPipeline r;
  r.duration_ms = uniform_int(rng, 15000, 120000);
  r.sentences = random_transcript(rng, r.duration_ms, 25);
  r.comments = random_comments(rng, r.duration_ms, static_cast<std::size_t>(uniform_int(rng, 0, 60)));
  r.envelope = random_envelope(rng, r.duration_ms);
  std::vector<KeyframeRef> frames;
  for (int i = 0; i < 3; ++i) {
    frames.push_back({uniform_int(rng, 0, r.duration_ms), "k" + std::to_string(i) + ".jpg", random_words(rng, 6)});
  }
  PipelineConfig config;
  config.seed = rng();
  r.seg = segmentation::segment_video(r.sentences, r.envelope, r.duration_ms, providers, config.segmentation_config());
  r.topics = curation::curate(r.seg.segments, r.comments, frames, providers, config.curation()).topics;
  r.plan = pipeline::plan(r.topics, r.seg, r.sentences, r.comments, r.duration_ms, providers, config);
  return r;
}

// Every broken schedule property, one message each; empty when all hold.
inline std::vector<std::string> timeline_violations(const RandomPipeline& r) {
  using namespace commentcast;
  std::vector<std::string> out;
  const auto& m = r.plan.manifest;
  std::map<int, const InsertionPoint*> point_by_id;
  for (const auto& p : r.seg.points) point_by_id[p.id] = &p;
  std::vector<std::int64_t> sentence_starts;
  for (const auto& s : r.sentences) sentence_starts.push_back(s.start_ms);

  std::int64_t last_autoplay_end = -1;
  for (const auto& e : m.entries) {
    const auto tag = "entry " + std::to_string(e.id) + ": ";
    if (e.lines.empty()) out.push_back(tag + "no lines");
    for (std::size_t i = 1; i < e.lines.size(); ++i) {
      const auto& a = e.lines[i - 1];
      const auto& b = e.lines[i];
      if (!a.narrator() && !b.narrator() && a.tone == b.tone) out.push_back(tag + "adjacent equal tones at " + b.id);
      if (b.offset_ms != a.offset_ms + a.duration_ms) out.push_back(tag + "lines not back to back at " + b.id);
    }
    if (e.kind == EntryKind::AutoPlay) {
      const auto* p = point_by_id.at(e.point_id);
      const auto start = e.time_ms;
      const auto end = e.time_ms + e.total_ms();
      if (start < p->time_ms || end > p->end_ms) out.push_back(tag + "outside its insertable interval");
      bool inside = false;
      for (const auto& iv : r.seg.insertable) inside = inside || (iv.start_ms <= start && end <= iv.end_ms);
      if (!inside) out.push_back(tag + "not inside a quiet interval");
      for (const auto& s : r.sentences) {
        if (start < s.end_ms && s.start_ms < end) out.push_back(tag + "overlaps sentence " + std::to_string(s.index));
      }
      if (start < last_autoplay_end) out.push_back(tag + "overlaps the previous auto-play entry");
      last_autoplay_end = end;
      if (e.notify_side || e.rewind_target_ms || e.response_window_s) out.push_back(tag + "auto-play carries notify data");
    } else {
      const bool narrator_first = !e.lines.empty() && e.lines.front().narrator();
      const auto want = narrator_first ? NotifySide::Left : NotifySide::Right;
      if (e.notify_side != want) out.push_back(tag + "notify side breaks the narrator-first rule");
      if (!e.rewind_target_ms) {
        out.push_back(tag + "no rewind target");
      } else {
        if (std::find(sentence_starts.begin(), sentence_starts.end(), *e.rewind_target_ms) == sentence_starts.end()) {
          out.push_back(tag + "rewind target is not a sentence start");
        }
        if (*e.rewind_target_ms > e.time_ms) out.push_back(tag + "rewind target after the notification");
      }
      if (e.response_window_s != 5.0) out.push_back(tag + "response window is not 5 s");
    }
  }
  for (const auto& [id, path] : m.assets) {
    if (path != "assets/" + id + ".wav") out.push_back("asset path for " + id);
  }
  return out;
}

}  // namespace testing_support
