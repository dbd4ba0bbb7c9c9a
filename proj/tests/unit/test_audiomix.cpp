#include "commentcast/audiomix.hpp"

#include "../audio_oracles.hpp"
#include "../support.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <random>

using namespace commentcast;
using namespace commentcast::audiomix;
using testing_support::as_doubles;
using testing_support::power;
using testing_support::rms;

namespace {

std::vector<double> noise(std::mt19937_64& rng, std::size_t n, double amplitude) {
  std::vector<double> out(n);
  for (auto& v : out) v = testing_support::uniform_real(rng, -amplitude, amplitude);
  return out;
}

DiscussionLine line(std::string id, Tone tone, std::string text, double est) {
  DiscussionLine l;
  l.id = std::move(id);
  l.tone = tone;
  l.text = std::move(text);
  l.est_duration_s = est;
  l.duration_ms = std::llround(est * 1000);
  return l;
}

TimelineEntry autoplay_at(std::int64_t ms, std::vector<DiscussionLine> lines) {
  TimelineEntry e;
  e.kind = EntryKind::AutoPlay;
  e.time_ms = ms;
  e.lines = std::move(lines);
  return e;
}

PcmAudio quiet_video(std::mt19937_64& rng, double seconds, int rate) {
  PcmAudio a;
  a.sample_rate = rate;
  a.channels = 1;
  a.samples.resize(static_cast<std::size_t>(std::llround(seconds * rate)));
  for (auto& s : a.samples) s = static_cast<std::int16_t>(testing_support::uniform_int(rng, -300, 300));
  return a;
}

}  // namespace

TEST(Spatialize, PowerPreservedAtEveryAzimuth) {
  std::mt19937_64 rng(101);
  const auto x = noise(rng, 4000, 0.9);
  const double in = power(x);
  for (double az = -90.0; az <= 90.0; az += 7.5) {
    const auto s = spatialize(x, {az, 1.0});
    EXPECT_NEAR((power(s.left) + power(s.right)) / in, 1.0, 1e-3) << az;
  }
  for (const auto pos : {kNarratorPosition, kViewerPosition, kVideoPosition}) {
    const auto s = spatialize(x, pos);
    EXPECT_NEAR((power(s.left) + power(s.right)) / in, 1.0, 1e-3);
  }
}

TEST(Spatialize, CenterIsSymmetric) {
  std::mt19937_64 rng(102);
  const auto x = noise(rng, 2000, 1.0);
  const auto s = spatialize(x, kVideoPosition);
  for (std::size_t i = 0; i < x.size(); ++i) {
    ASSERT_NEAR(s.left[i], x[i] / std::numbers::sqrt2, 1e-6);
    ASSERT_NEAR(s.right[i], x[i] / std::numbers::sqrt2, 1e-6);
  }
}

TEST(Spatialize, NarratorSideRatio) {
  std::mt19937_64 rng(103);
  const auto x = noise(rng, 5000, 0.5);
  const auto s = spatialize(x, kNarratorPosition);
  // -60 degrees maps to 15 degrees on the pan quarter circle.
  const double analytic = std::pow(std::cos(std::numbers::pi / 12) / std::sin(std::numbers::pi / 12), 2);
  EXPECT_NEAR(analytic, 13.93, 0.01);
  EXPECT_NEAR(power(s.left) / power(s.right), 13.93, 0.1);
  const auto v = spatialize(x, kViewerPosition);
  EXPECT_NEAR(power(v.right) / power(v.left), 13.93, 0.1);
}

TEST(Spatialize, SilenceStaysSilent) {
  const std::vector<double> zeros(100, 0.0);
  const auto s = spatialize(zeros, kNarratorPosition);
  EXPECT_EQ(s.left, zeros);
  EXPECT_EQ(s.right, zeros);
}

TEST(Notification, HalfSecondPannedAndDeterministic) {
  const auto left = render_notification(NotifySide::Left);
  EXPECT_EQ(left.channels, 2);
  EXPECT_EQ(left.sample_rate, kOutputSampleRate);
  EXPECT_NEAR(left.duration_s() * 1000.0, 500.0, 1.0);
  EXPECT_LT(rms(as_doubles(left, 1)), rms(as_doubles(left, 0)));
  const auto right = render_notification(NotifySide::Right);
  EXPECT_LT(rms(as_doubles(right, 0)), rms(as_doubles(right, 1)));
  EXPECT_EQ(render_notification(NotifySide::Left), left);
  EXPECT_GT(rms(as_doubles(left, 0)), 0.01);
}

TEST(RenderLine, OfflineAssetMatchesRate) {
  providers::offline::OfflineEngine engine;
  providers::Providers p(engine);
  const auto audio = render_line(line("t0-0", Tone::V1, "one two three four five six", 2.0), p);
  EXPECT_EQ(audio.channels, 1);
  EXPECT_NEAR(audio.duration_s(), 2.0 / 1.15, 1e-3);
  EXPECT_NEAR(audio.duration_s(), 1.739, 1e-3);
}

TEST(RenderLine, NarratorUsesNarratorTone) {
  providers::offline::OfflineEngine engine;
  providers::Providers p(engine);
  const auto x = as_doubles(render_line(line("t0-0", Tone::Narrator, "a man holds a phone", 5.0 / 3.0), p));
  const double narrator = testing_support::tone_power(x, 220, kOutputSampleRate);
  for (double viewer : {330.0, 440.0, 550.0}) EXPECT_GT(narrator, 10 * testing_support::tone_power(x, viewer, kOutputSampleRate));
}

TEST(RenderLine, UnreachableRateFallsBackToSilence) {
  testing_support::ScriptedEngine engine;
  engine.on_tts([](const nlohmann::json&) { return testing_support::sine(300, 5.0, kOutputSampleRate, 0.5); });
  providers::Providers p(engine);
  Warnings w;
  const auto audio = render_line(line("t3-1", Tone::V2, "too slow", 2.0 / 3.0), p, &w);
  EXPECT_NEAR(audio.duration_s(), 2.0 / 3.0, 1e-4);
  for (auto s : audio.samples) ASSERT_EQ(s, 0);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_NE(w.items()[0].find("t3-1"), std::string::npos);
}

TEST(Mixdown, NoEntriesIsCenteredVideo) {
  std::mt19937_64 rng(104);
  TimelineManifest m;
  m.duration_ms = 3000;
  const auto video = quiet_video(rng, 3.0, 8000);
  const auto preview = mixdown(m, video, {});
  EXPECT_EQ(preview, to_pcm(spatialize(to_output_mono(video), kVideoPosition)));
  const auto l = as_doubles(preview, 0);
  const auto r = as_doubles(preview, 1);
  EXPECT_EQ(l, r);
}

TEST(Mixdown, LinePlacedByCrossCorrelation) {
  std::mt19937_64 rng(105);
  providers::offline::OfflineEngine engine;
  providers::Providers p(engine);
  TimelineManifest m;
  m.duration_ms = 10000;
  const auto l = line("t0-0", Tone::V1, "here it comes", 1.0);
  m.entries = {autoplay_at(8000, {l})};
  MixAssets assets;
  assets.lines[l.id] = render_line(l, p);
  const auto preview = mixdown(m, quiet_video(rng, 10.0, 16000), assets);
  const auto lag = testing_support::best_lag(as_doubles(preview, 1), as_doubles(assets.lines[l.id]));
  EXPECT_NEAR(static_cast<double>(lag) / kOutputSampleRate, 8.0, 0.001);
}

TEST(Mixdown, LoudSourcesNormalizedNotClipped) {
  providers::offline::OfflineEngine engine;
  providers::Providers p(engine);
  TimelineManifest m;
  m.duration_ms = 4000;
  const auto a = line("t0-0", Tone::V1, "loud", 3.0);
  m.entries = {autoplay_at(0, {a})};
  MixAssets assets;
  assets.lines[a.id] = testing_support::sine(500, 2.7, kOutputSampleRate, 1.0);
  const auto preview = mixdown(m, testing_support::sine(500, 4.0, kOutputSampleRate, 1.0), assets);
  int peak = 0;
  for (auto s : preview.samples) peak = std::max(peak, std::abs(static_cast<int>(s)));
  EXPECT_LE(peak, 32767);
  EXPECT_GE(peak, 32760);  // scaled to the peak, not further
}

TEST(Mixdown, MissingAssetRejected) {
  TimelineManifest m;
  m.duration_ms = 2000;
  m.entries = {autoplay_at(0, {line("t9-0", Tone::V3, "x", 1.0 / 3.0)})};
  try {
    mixdown(m, {}, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AssetMissing);
  }
}

TEST(Mixdown, OnDemandAddsOnlyTheCueAndKeepsDuration) {
  TimelineManifest m;
  m.duration_ms = 12345;
  TimelineEntry e;
  e.kind = EntryKind::OnDemand;
  e.time_ms = 3000;
  e.notify_side = NotifySide::Left;
  e.lines = {line("t1-0", Tone::Narrator, "a long description nobody rendered", 30.0)};
  m.entries = {e};
  const auto preview = mixdown(m, {}, {});
  EXPECT_EQ(preview.frames(), static_cast<std::size_t>(12345LL * kOutputSampleRate / 1000));
  EXPECT_NEAR(preview.duration_s(), 12.345, 1.0 / kOutputSampleRate);
  const auto left = as_doubles(preview, 0);
  const auto cue = as_doubles(render_notification(NotifySide::Left), 0);
  const auto lag = testing_support::best_lag(left, cue);
  EXPECT_NEAR(static_cast<double>(lag) / kOutputSampleRate, 3.0, 0.001);
  // Nothing else sounds: silence after the cue ends.
  for (std::size_t i = static_cast<std::size_t>(3.6 * kOutputSampleRate); i < left.size(); ++i) ASSERT_EQ(left[i], 0.0);
}
