#pragma once

#include "commentcast/error.hpp"
#include "commentcast/ingest/envelope.hpp"
#include "commentcast/ingest/wav.hpp"
#include "commentcast/providers/providers.hpp"
#include "commentcast/timeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace commentcast {

struct SpatialPosition {
  double azimuth_deg = 0.0;
  double gain = 1.0;
};

inline constexpr SpatialPosition kNarratorPosition{-60.0, 1.0};
inline constexpr SpatialPosition kViewerPosition{60.0, 1.0};
inline constexpr SpatialPosition kVideoPosition{0.0, 1.0};

inline constexpr int kOutputSampleRate = 44100;
inline constexpr double kNotificationS = 0.5;

struct StereoSignal {
  std::vector<double> left;
  std::vector<double> right;
  std::size_t frames() const { return left.size(); }
};

namespace audiomix {

/// Constant-power pan: azimuth -90 is hard left, +90 hard right.
inline StereoSignal spatialize(std::span<const double> mono, SpatialPosition position) {
  const double theta = (position.azimuth_deg + 90.0) / 180.0 * (std::numbers::pi / 2.0);
  const double gl = std::cos(theta) * position.gain;
  const double gr = std::sin(theta) * position.gain;
  StereoSignal out;
  out.left.resize(mono.size());
  out.right.resize(mono.size());
  for (std::size_t i = 0; i < mono.size(); ++i) {
    out.left[i] = gl * mono[i];
    out.right[i] = gr * mono[i];
  }
  return out;
}

inline SpatialPosition position_of(Tone tone) { return tone == Tone::Narrator ? kNarratorPosition : kViewerPosition; }

inline SpatialPosition position_of(NotifySide side) {
  return side == NotifySide::Left ? kNarratorPosition : kViewerPosition;
}

inline std::vector<double> resample_linear(std::span<const double> in, int from_rate, int to_rate) {
  if (from_rate <= 0 || to_rate <= 0) throw Error(ErrorCode::InvalidAudio, "sample rates must be positive");
  if (from_rate == to_rate || in.empty()) return {in.begin(), in.end()};
  const auto out_len = static_cast<std::size_t>(
      std::llround(static_cast<double>(in.size()) * to_rate / static_cast<double>(from_rate)));
  std::vector<double> out(out_len);
  const double step = static_cast<double>(from_rate) / to_rate;
  for (std::size_t i = 0; i < out_len; ++i) {
    const double pos = static_cast<double>(i) * step;
    const auto k = static_cast<std::size_t>(pos);
    if (k + 1 >= in.size()) {
      out[i] = in.back();
      continue;
    }
    const double frac = pos - static_cast<double>(k);
    out[i] = in[k] + (in[k + 1] - in[k]) * frac;
  }
  return out;
}

// Mono signal at the output rate, whatever the asset's rate and layout.
inline std::vector<double> to_output_mono(const PcmAudio& audio) {
  const auto mono = ingest::downmix_normalized(audio);
  return resample_linear(mono, audio.sample_rate, kOutputSampleRate);
}

inline PcmAudio silence(double seconds, int sample_rate = kOutputSampleRate) {
  PcmAudio a;
  a.sample_rate = sample_rate;
  a.channels = 1;
  a.samples.assign(static_cast<std::size_t>(std::llround(seconds * sample_rate)), 0);
  return a;
}

/// Speech for one line sized to its estimated duration. A service that cannot
/// reach the required rate yields silence of the estimated length instead.
inline PcmAudio render_line(const DiscussionLine& line, const providers::Providers& providers,
                            Warnings* warnings = nullptr) {
  if (!(line.est_duration_s > 0.0)) return silence(0.0);
  try {
    return providers.tts(line.text, line.tone, line.est_duration_s).audio;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DurationUnachievable) throw;
    if (warnings) warnings->add("line " + line.id + ": " + e.what() + "; using silence");
    return silence(line.est_duration_s);
  }
}

/// Half-second bubble: a sine sweeping 800 -> 1200 Hz under an exponential
/// decay, with a short attack so it starts without a click.
inline std::vector<double> notification_mono() {
  const auto frames = static_cast<std::size_t>(std::llround(kNotificationS * kOutputSampleRate));
  std::vector<double> out(frames);
  constexpr double f0 = 800.0;
  constexpr double f1 = 1200.0;
  constexpr double attack_s = 0.005;
  constexpr double decay_s = 0.12;
  for (std::size_t n = 0; n < frames; ++n) {
    const double t = static_cast<double>(n) / kOutputSampleRate;
    const double phase = 2.0 * std::numbers::pi * (f0 * t + (f1 - f0) * t * t / (2.0 * kNotificationS));
    const double envelope = std::min(1.0, t / attack_s) * std::exp(-t / decay_s);
    out[n] = 0.8 * envelope * std::sin(phase);
  }
  return out;
}

inline PcmAudio to_pcm(const StereoSignal& s, int sample_rate = kOutputSampleRate) {
  PcmAudio a;
  a.sample_rate = sample_rate;
  a.channels = 2;
  a.samples.resize(s.frames() * 2);
  const auto q = [](double x) {
    return static_cast<std::int16_t>(std::clamp<long>(std::lround(x * 32767.0), -32768, 32767));
  };
  for (std::size_t i = 0; i < s.frames(); ++i) {
    a.samples[2 * i] = q(s.left[i]);
    a.samples[2 * i + 1] = q(s.right[i]);
  }
  return a;
}

inline PcmAudio render_notification(NotifySide side) {
  return to_pcm(spatialize(notification_mono(), position_of(side)));
}

struct MixAssets {
  std::map<std::string, PcmAudio> lines;  // line id -> rendered speech
};

namespace detail {

inline void add_at(StereoSignal& mix, const StereoSignal& source, std::int64_t start_frame) {
  for (std::size_t i = 0; i < source.frames(); ++i) {
    const auto at = start_frame + static_cast<std::int64_t>(i);
    if (at < 0) continue;
    if (static_cast<std::size_t>(at) >= mix.frames()) break;
    mix.left[static_cast<std::size_t>(at)] += source.left[i];
    mix.right[static_cast<std::size_t>(at)] += source.right[i];
  }
}

inline std::int64_t frame_of(std::int64_t ms) { return ms * kOutputSampleRate / 1000; }

}  // namespace detail

/// Stereo preview of the whole video: video audio in the centre, auto-play
/// lines at their scheduled times, and the notification cue at each
/// on-demand entry. The result is scaled down only if some sample would
/// exceed full scale, and always lasts exactly the video's duration.
inline PcmAudio mixdown(const TimelineManifest& manifest, const PcmAudio& video_audio, const MixAssets& assets) {
  StereoSignal mix;
  const auto frames = static_cast<std::size_t>(detail::frame_of(manifest.duration_ms));
  mix.left.assign(frames, 0.0);
  mix.right.assign(frames, 0.0);
  if (!video_audio.samples.empty()) detail::add_at(mix, spatialize(to_output_mono(video_audio), kVideoPosition), 0);

  StereoSignal cue_left;
  StereoSignal cue_right;
  for (const auto& entry : manifest.entries) {
    if (entry.kind == EntryKind::OnDemand) {
      const auto side = entry.notify_side.value_or(NotifySide::Right);
      auto& cue = side == NotifySide::Left ? cue_left : cue_right;
      if (cue.frames() == 0) cue = spatialize(notification_mono(), position_of(side));
      detail::add_at(mix, cue, detail::frame_of(entry.time_ms));
      continue;
    }
    for (const auto& line : entry.lines) {
      const auto it = assets.lines.find(line.id);
      if (it == assets.lines.end()) throw Error(ErrorCode::AssetMissing, "no audio for line " + line.id);
      detail::add_at(mix, spatialize(to_output_mono(it->second), position_of(line.tone)),
                     detail::frame_of(entry.time_ms + line.offset_ms));
    }
  }

  double peak = 0.0;
  for (std::size_t i = 0; i < frames; ++i) peak = std::max({peak, std::abs(mix.left[i]), std::abs(mix.right[i])});
  if (peak > 1.0) {
    const double scale = 1.0 / peak;
    for (std::size_t i = 0; i < frames; ++i) {
      mix.left[i] *= scale;
      mix.right[i] *= scale;
    }
  }
  return to_pcm(mix);
}

}  // namespace audiomix
}  // namespace commentcast
