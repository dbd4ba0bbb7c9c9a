#include "commentcast/segmentation.hpp"

#include "../support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace commentcast;
using namespace commentcast::segmentation;
using testing_support::ScriptedEngine;

namespace {

TimedSentence sentence(int index, std::int64_t start, std::int64_t end, std::string text = "words") {
  return {index, start, end, std::move(text)};
}

std::string ten_words(const std::string& word) {
  std::string s;
  for (int i = 0; i < 10; ++i) s += (i ? " " : "") + word + std::to_string(i);
  return s;
}

Segment speech_over(const std::vector<TimedSentence>& s) {
  Segment seg;
  seg.kind = SegmentKind::Speech;
  seg.start_ms = s.front().start_ms;
  seg.end_ms = s.back().end_ms;
  for (std::size_t i = 0; i < s.size(); ++i) seg.sentence_ids.push_back(static_cast<int>(i));
  return seg;
}

Segment non_speech(std::int64_t a, std::int64_t b) {
  Segment s;
  s.kind = SegmentKind::NonSpeech;
  s.start_ms = a;
  s.end_ms = b;
  return s;
}

VolumeEnvelope flat_envelope(std::int64_t duration_ms, double level) {
  VolumeEnvelope env;
  env.duration_ms = duration_ms;
  env.rms.assign(static_cast<std::size_t>((duration_ms + 249) / 250), level);
  return env;
}

// 1 ms boolean mask oracle: quiet milliseconds inside the segment, then runs
// of at least `min_ms`.
std::vector<Interval> mask_oracle(const Segment& seg, const VolumeEnvelope& env, double threshold, std::int64_t min_ms) {
  std::vector<bool> loud(static_cast<std::size_t>(seg.end_ms - seg.start_ms), false);
  for (std::size_t k = 0; k < env.rms.size(); ++k) {
    if (env.rms[k] <= threshold) continue;
    const auto start = static_cast<std::int64_t>(k) * 250;
    const auto end = std::min(start + 1000, env.duration_ms);
    for (auto t = std::max(start, seg.start_ms); t < std::min(end, seg.end_ms); ++t) {
      loud[static_cast<std::size_t>(t - seg.start_ms)] = true;
    }
  }
  std::vector<Interval> out;
  std::int64_t run_start = -1;
  for (std::int64_t t = seg.start_ms; t <= seg.end_ms; ++t) {
    const bool quiet = t < seg.end_ms && !loud[static_cast<std::size_t>(t - seg.start_ms)];
    if (quiet && run_start < 0) run_start = t;
    if (!quiet && run_start >= 0) {
      if (t - run_start >= min_ms) out.push_back({run_start, t});
      run_start = -1;
    }
  }
  return out;
}

}  // namespace

// --- find_segments ------------------------------------------------------

TEST(FindSegments, ShortLeadingGapAbsorbed) {
  const auto segs = find_segments({sentence(1, 1010, 4100), sentence(2, 4500, 8000)}, 15000);
  ASSERT_EQ(segs.size(), 2u);
  EXPECT_EQ(segs[0].kind, SegmentKind::Speech);
  EXPECT_EQ(segs[0].start_ms, 0);
  EXPECT_EQ(segs[0].end_ms, 8000);
  EXPECT_EQ(segs[0].sentence_ids, (std::vector<int>{0, 1}));
  EXPECT_EQ(segs[1].kind, SegmentKind::NonSpeech);
  EXPECT_EQ(segs[1].start_ms, 8000);
  EXPECT_EQ(segs[1].end_ms, 15000);
}

TEST(FindSegments, NoSpeech) {
  const auto segs = find_segments({}, 5000);
  ASSERT_EQ(segs.size(), 1u);
  EXPECT_EQ(segs[0].kind, SegmentKind::NonSpeech);
  EXPECT_EQ(segs[0].end_ms, 5000);
}

TEST(FindSegments, ThreeSecondGapSplits) {
  const auto segs = find_segments({sentence(1, 0, 3000), sentence(2, 6000, 9000)}, 9000);
  ASSERT_EQ(segs.size(), 3u);
  EXPECT_EQ(segs[0].kind, SegmentKind::Speech);
  EXPECT_EQ(segs[1].kind, SegmentKind::NonSpeech);
  EXPECT_EQ(segs[1].start_ms, 3000);
  EXPECT_EQ(segs[1].end_ms, 6000);
  EXPECT_EQ(segs[2].start_ms, 6000);
  EXPECT_EQ(segs[2].end_ms, 9000);
}

TEST(FindSegments, ThresholdIsStrict) {
  EXPECT_EQ(find_segments({sentence(1, 0, 1000), sentence(2, 3000, 4000)}, 4000).size(), 1u);
  EXPECT_EQ(find_segments({sentence(1, 0, 1000), sentence(2, 3001, 4000)}, 4000).size(), 3u);
}

TEST(FindSegments, SentenceBeyondDuration) {
  try {
    find_segments({sentence(1, 0, 6000)}, 5000);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DurationMismatch);
  }
}

TEST(FindSegments, PropertyTilingAndMembership) {
  std::mt19937_64 rng(21);
  for (int round = 0; round < 500; ++round) {
    const auto duration = testing_support::uniform_int(rng, 1000, 90000);
    const auto sentences = testing_support::random_transcript(rng, duration, 20);
    const auto segs = find_segments(sentences, duration);
    ASSERT_FALSE(segs.empty());
    ASSERT_EQ(segs.front().start_ms, 0);
    ASSERT_EQ(segs.back().end_ms, duration);
    std::vector<int> seen;
    for (std::size_t i = 0; i < segs.size(); ++i) {
      ASSERT_EQ(segs[i].id, static_cast<int>(i));
      ASSERT_LT(segs[i].start_ms, segs[i].end_ms);
      if (i > 0) {
        ASSERT_EQ(segs[i].start_ms, segs[i - 1].end_ms);
        ASSERT_NE(segs[i].kind, segs[i - 1].kind) << "adjacent segments of one kind";
      }
      if (segs[i].kind == SegmentKind::NonSpeech) {
        if (segs.size() > 1) ASSERT_GT(segs[i].end_ms - segs[i].start_ms, 2000);
        ASSERT_TRUE(segs[i].sentence_ids.empty());
        for (const auto& s : sentences) ASSERT_TRUE(s.end_ms <= segs[i].start_ms || s.start_ms >= segs[i].end_ms);
      }
      for (int id : segs[i].sentence_ids) {
        ASSERT_GE(sentences[static_cast<std::size_t>(id)].start_ms, segs[i].start_ms);
        ASSERT_LE(sentences[static_cast<std::size_t>(id)].end_ms, segs[i].end_ms);
        seen.push_back(id);
      }
    }
    ASSERT_EQ(seen.size(), sentences.size());
    for (std::size_t i = 0; i < seen.size(); ++i) ASSERT_EQ(seen[i], static_cast<int>(i));
  }
}

// --- exclude_high_volume ------------------------------------------------

TEST(ExcludeHighVolume, QuietAndLoud) {
  EXPECT_EQ(exclude_high_volume(non_speech(8000, 15000), flat_envelope(15000, 0.1)),
            (std::vector<Interval>{{8000, 15000}}));
  EXPECT_TRUE(exclude_high_volume(non_speech(8000, 15000), flat_envelope(15000, 0.95)).empty());
}

TEST(ExcludeHighVolume, ThresholdIsStrict) {
  EXPECT_EQ(exclude_high_volume(non_speech(0, 4000), flat_envelope(4000, 0.8)).size(), 1u);
  EXPECT_TRUE(exclude_high_volume(non_speech(0, 4000), flat_envelope(4000, 0.8000001)).empty());
}

TEST(ExcludeHighVolume, LoudWindowInTheMiddle) {
  auto env = flat_envelope(6000, 0.1);
  env.rms[8] = 0.95;  // window [2000, 3000)
  const auto seg = non_speech(0, 6000);
  const std::vector<Interval> expected = {{0, 2000}, {3000, 6000}};
  EXPECT_EQ(exclude_high_volume(seg, env), expected);
  EXPECT_EQ(mask_oracle(seg, env, 0.8, 500), expected);
}

TEST(ExcludeHighVolume, ShortLeftoversDropped) {
  auto env = flat_envelope(6000, 0.1);
  env.rms[2] = 0.9;  // [500, 1500): leaves [0, 500) which is exactly 500 ms
  env.rms[7] = 0.9;  // [1750, 2750): leaves [1500, 1750) which is too short
  EXPECT_EQ(exclude_high_volume(non_speech(0, 6000), env), (std::vector<Interval>{{0, 500}, {2750, 6000}}));
}

TEST(ExcludeHighVolume, PropertyMatchesMaskOracle) {
  std::mt19937_64 rng(33);
  for (int round = 0; round < 300; ++round) {
    const auto duration = testing_support::uniform_int(rng, 3000, 30000);
    auto env = flat_envelope(duration, 0.0);
    for (auto& r : env.rms) r = rng() % 5 == 0 ? testing_support::uniform_real(rng, 0.81, 1.0)
                                                : testing_support::uniform_real(rng, 0.0, 0.8);
    const auto a = testing_support::uniform_int(rng, 0, duration - 2100);
    const auto b = testing_support::uniform_int(rng, a + 2001, duration);
    const auto seg = non_speech(a, b);
    ASSERT_EQ(exclude_high_volume(seg, env), mask_oracle(seg, env, 0.8, 500)) << round;
  }
}

// --- detect_breaks ------------------------------------------------------

TEST(DetectBreaks, ShortTailMergesForward) {
  const std::vector<TimedSentence> s = {sentence(1, 0, 3000, ten_words("a")), sentence(2, 3100, 6000, ten_words("b")),
                                        sentence(3, 6100, 9000, ten_words("c"))};
  ScriptedEngine engine;
  engine.on(providers::Capability::SegmentSplit, [](const nlohmann::json&) { return nlohmann::json::array({1}); });
  providers::Providers p(engine);
  const auto next = non_speech(9000, 15000);
  const auto breaks = detect_breaks(speech_over(s), s, p, {}, &next);
  ASSERT_EQ(breaks.size(), 1u);
  EXPECT_EQ(breaks[0].time_ms, 6000);
  EXPECT_EQ(breaks[0].preceding_sentence_id, 1);
  EXPECT_EQ(breaks[0].following_sentence_id, 2);
}

TEST(DetectBreaks, ShortChunkNotABreak) {
  // Split after sentence 1 is proposed but its chunk holds only 10 words.
  const std::vector<TimedSentence> s = {sentence(1, 0, 3000, ten_words("a")), sentence(2, 3100, 6000, ten_words("b")),
                                        sentence(3, 6100, 9000, ten_words("c"))};
  ScriptedEngine engine;
  engine.on(providers::Capability::SegmentSplit, [](const nlohmann::json&) { return nlohmann::json::array({0, 1}); });
  providers::Providers p(engine);
  const auto breaks = detect_breaks(speech_over(s), s, p);
  ASSERT_EQ(breaks.size(), 1u);
  EXPECT_EQ(breaks[0].preceding_sentence_id, 1);
}

TEST(DetectBreaks, FifteenWordsNoBreak) {
  const std::vector<TimedSentence> s = {sentence(1, 0, 2000, "one two three four five six seven eight"),
                                        sentence(2, 2100, 4000, "nine ten eleven twelve thirteen fourteen fifteen")};
  ScriptedEngine engine;
  engine.on(providers::Capability::SegmentSplit, [](const nlohmann::json&) { return nlohmann::json::array({0}); });
  providers::Providers p(engine);
  EXPECT_TRUE(detect_breaks(speech_over(s), s, p).empty());
}

TEST(DetectBreaks, SingleSentenceSkipsProvider) {
  const std::vector<TimedSentence> s = {sentence(1, 0, 2000, ten_words("a"))};
  ScriptedEngine engine;
  providers::Providers p(engine);
  EXPECT_TRUE(detect_breaks(speech_over(s), s, p).empty());
  EXPECT_EQ(engine.calls(providers::Capability::SegmentSplit), 0);
}

TEST(DetectBreaks, OfflineSplitterOnTopicShift) {
  const std::string a = "snack corn market sweet salty crunchy price dollar cheap spicy";
  const std::string b = "guitar stage band song drum singer crowd lights music encore";
  std::vector<TimedSentence> s;
  for (int i = 0; i < 6; ++i) s.push_back(sentence(i + 1, i * 4000, i * 4000 + 3500, i < 3 ? a : b));
  providers::offline::OfflineEngine engine;
  providers::Providers p(engine);
  const auto breaks = detect_breaks(speech_over(s), s, p);
  ASSERT_EQ(breaks.size(), 1u);
  EXPECT_EQ(breaks[0].preceding_sentence_id, 2);
  // Counting oracle: every chunk that ends at a break holds >= 20 words.
  std::size_t words = 0;
  std::size_t b_idx = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::istringstream in(s[i].text);
    for (std::string w; in >> w;) ++words;
    if (b_idx < breaks.size() && breaks[b_idx].preceding_sentence_id == static_cast<int>(i)) {
      EXPECT_GE(words, 20u);
      words = 0;
      ++b_idx;
    }
  }
}

TEST(DetectBreaks, ProviderFailureNamesSegment) {
  const std::vector<TimedSentence> s = {sentence(1, 0, 3000, ten_words("a")), sentence(2, 3100, 6000, ten_words("b"))};
  ScriptedEngine engine;
  engine.on(providers::Capability::SegmentSplit, [](const nlohmann::json&) -> nlohmann::json {
    throw Error(ErrorCode::ProviderFailure, "down");
  });
  providers::Providers p(engine);
  auto seg = speech_over(s);
  seg.id = 7;
  try {
    detect_breaks(seg, s, p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ProviderFailure);
    EXPECT_NE(std::string(e.what()).find("segment 7"), std::string::npos);
  }
}

// --- build_insertion_points ---------------------------------------------

TEST(InsertionPoints, BreakAndGap) {
  const std::vector<TimedSentence> s = {sentence(1, 0, 5000, "before"), sentence(2, 5200, 8000, "after")};
  auto speech = speech_over(s);
  speech.start_ms = 0;
  auto gap = non_speech(8000, 15000);
  gap.id = 1;
  SpeechBreak b{0, 0, 5000, 0, 1};
  const auto points = build_insertion_points({speech, gap}, {b}, {{8000, 15000}}, s);
  ASSERT_EQ(points.size(), 2u);
  EXPECT_EQ(points[0].kind, PointKind::SpeechBreakPoint);
  EXPECT_EQ(points[0].time_ms, 5000);
  EXPECT_DOUBLE_EQ(points[0].capacity_s, 10.0);
  EXPECT_EQ(points[0].context_before, "before");
  EXPECT_EQ(points[0].context_after, "after");
  EXPECT_EQ(points[1].kind, PointKind::NonSpeechGap);
  EXPECT_EQ(points[1].time_ms, 8000);
  EXPECT_DOUBLE_EQ(points[1].capacity_s, 7.0);
  EXPECT_EQ(points[1].segment_id, 1);
  EXPECT_EQ(points[1].context_before, "after");
}

TEST(InsertionPoints, EmptyAndUnclampedGap) {
  EXPECT_TRUE(build_insertion_points({}, {}, {}, {}).empty());
  const auto points = build_insertion_points({non_speech(0, 12000)}, {}, {{0, 12000}}, {});
  ASSERT_EQ(points.size(), 1u);
  EXPECT_DOUBLE_EQ(points[0].capacity_s, 12.0);
}

TEST(SegmentVideo, PropertyPointsAvoidSpeechAndLoudWindows) {
  std::mt19937_64 rng(44);
  providers::offline::OfflineEngine engine;
  providers::Providers p(engine);
  for (int round = 0; round < 200; ++round) {
    const auto duration = testing_support::uniform_int(rng, 5000, 90000);
    const auto sentences = testing_support::random_transcript(rng, duration, 20);
    auto env = flat_envelope(duration, 0.0);
    for (auto& r : env.rms) r = rng() % 6 == 0 ? 0.9 : 0.2;
    const auto result = segment_video(sentences, env, duration, p);
    for (const auto& pt : result.points) {
      ASSERT_GE(pt.id, 0);
      if (pt.kind == PointKind::SpeechBreakPoint) {
        ASSERT_DOUBLE_EQ(pt.capacity_s, 10.0);
        continue;
      }
      ASSERT_GE(pt.end_ms - pt.time_ms, 500);
      ASSERT_DOUBLE_EQ(pt.capacity_s, static_cast<double>(pt.end_ms - pt.time_ms) / 1000.0);
      for (const auto& s : sentences) ASSERT_TRUE(s.end_ms <= pt.time_ms || s.start_ms >= pt.end_ms);
      for (std::size_t k = 0; k < env.rms.size(); ++k) {
        if (env.rms[k] <= 0.8) continue;
        const auto [ws, we] = env.window_span_ms(k);
        ASSERT_TRUE(we <= pt.time_ms || ws >= pt.end_ms) << "gap point overlaps loud window";
      }
    }
    for (std::size_t i = 1; i < result.points.size(); ++i) ASSERT_LE(result.points[i - 1].time_ms, result.points[i].time_ms);
  }
}
