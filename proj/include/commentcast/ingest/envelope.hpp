#pragma once

#include "commentcast/error.hpp"
#include "commentcast/ingest/types.hpp"
#include "commentcast/ingest/wav.hpp"

#include <cmath>
#include <span>
#include <vector>

namespace commentcast::ingest {

// Averages interleaved channels into one full-scale-normalized signal in [-1, 1].
inline std::vector<double> downmix_normalized(const PcmAudio& audio) {
  const std::size_t frames = audio.frames();
  const auto channels = static_cast<std::size_t>(audio.channels);
  std::vector<double> mono(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    double sum = 0.0;
    for (std::size_t c = 0; c < channels; ++c) sum += audio.samples[f * channels + c];
    mono[f] = sum / static_cast<double>(channels) / 32768.0;
  }
  return mono;
}

/// RMS volume over a sliding window; one value per hop.
///
/// Produces ceil(duration / hop) windows. Tail windows shorter than window_s
/// are computed over the samples that remain.
inline VolumeEnvelope compute_envelope(std::span<const double> mono, int sample_rate,
                                       double window_s = 1.0, double hop_s = 0.25) {
  if (sample_rate <= 0) throw Error(ErrorCode::InvalidAudio, "sample rate must be positive");
  if (mono.empty()) throw Error(ErrorCode::EmptyAudio, "no samples");
  if (!(window_s > 0.0) || !(hop_s > 0.0)) throw Error(ErrorCode::InvalidInput, "window and hop must be positive");

  VolumeEnvelope env;
  env.window_s = window_s;
  env.hop_s = hop_s;
  env.duration_ms = static_cast<std::int64_t>(mono.size()) * 1000 / sample_rate;

  const double hop_samples = hop_s * sample_rate;
  const auto window_samples = static_cast<std::size_t>(std::llround(window_s * sample_rate));
  const auto count = static_cast<std::size_t>(std::ceil(static_cast<double>(mono.size()) / hop_samples - 1e-9));

  // Prefix sums of squares keep this O(n) regardless of overlap.
  std::vector<double> prefix(mono.size() + 1, 0.0);
  for (std::size_t i = 0; i < mono.size(); ++i) prefix[i + 1] = prefix[i] + mono[i] * mono[i];

  env.rms.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const auto begin = std::min(mono.size(), static_cast<std::size_t>(std::llround(static_cast<double>(k) * hop_samples)));
    const auto end = std::min(mono.size(), begin + window_samples);
    const double energy = end > begin ? (prefix[end] - prefix[begin]) / static_cast<double>(end - begin) : 0.0;
    env.rms.push_back(std::min(1.0, std::sqrt(std::max(0.0, energy))));
  }
  return env;
}

inline VolumeEnvelope compute_envelope(const PcmAudio& audio, double window_s = 1.0, double hop_s = 0.25) {
  if (audio.samples.empty()) throw Error(ErrorCode::EmptyAudio, "no samples");
  const auto mono = downmix_normalized(audio);
  return compute_envelope(mono, audio.sample_rate, window_s, hop_s);
}

}  // namespace commentcast::ingest
