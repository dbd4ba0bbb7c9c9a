#pragma once

// Helpers shared by the unit and acceptance suites: temporary directories, a
// scriptable engine, and small seeded generators for property tests.

#include "commentcast/error.hpp"
#include "commentcast/ingest/types.hpp"
#include "commentcast/ingest/wav.hpp"
#include "commentcast/providers/engine.hpp"
#include "commentcast/providers/offline.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace testing_support {

namespace fs = std::filesystem;
using commentcast::providers::Capability;
using commentcast::providers::Engine;
using commentcast::providers::ProviderRequest;

inline fs::path fixture_dir() { return fs::path(COMMENTCAST_FIXTURE_DIR); }

class TempDir {
 public:
  explicit TempDir(const std::string& tag = "cc") {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            (tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter.fetch_add(1)));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

/// Engine whose answers come from per-capability callbacks. Capabilities
/// without a handler fall through to the offline engine. Counts calls.
class ScriptedEngine final : public Engine {
 public:
  using Handler = std::function<nlohmann::json(const nlohmann::json&)>;
  using TtsHandler = std::function<commentcast::PcmAudio(const nlohmann::json&)>;

  explicit ScriptedEngine(commentcast::providers::offline::OfflineOptions options = {}) : offline_(std::move(options)) {}

  void on(Capability c, Handler h) { handlers_[c] = std::move(h); }
  void on_tts(TtsHandler h) { tts_ = std::move(h); }

  std::string fingerprint() const override { return "scripted"; }

  nlohmann::json invoke(const ProviderRequest& request) const override {
    ++calls_[static_cast<int>(request.capability)];
    if (auto it = handlers_.find(request.capability); it != handlers_.end()) return it->second(request.payload);
    return offline_.invoke(request);
  }

  commentcast::PcmAudio synthesize(const ProviderRequest& request) const override {
    ++calls_[static_cast<int>(Capability::Tts)];
    if (tts_) return tts_(request.payload);
    return offline_.synthesize(request);
  }

  int calls(Capability c) const { return calls_[static_cast<int>(c)]; }

 private:
  commentcast::providers::offline::OfflineEngine offline_;
  std::map<Capability, Handler> handlers_;
  TtsHandler tts_;
  mutable std::array<std::atomic<int>, 9> calls_{};
};

inline const std::vector<std::string>& vocabulary() {
  static const std::vector<std::string> words = {
      "snack", "water", "phone", "music", "market", "corn",  "bottle", "mirror", "price", "dollar",
      "sweet", "salty", "crunchy", "pink", "case",  "song",  "stage",  "table",  "box",   "night",
      "spicy", "cold",  "cheap", "cute",  "loud",  "band",  "plate",  "foot",   "drink", "camera"};
  return words;
}

inline std::string random_words(std::mt19937_64& rng, std::size_t count) {
  const auto& vocab = vocabulary();
  std::string out;
  for (std::size_t i = 0; i < count; ++i) {
    if (i) out += ' ';
    out += vocab[rng() % vocab.size()];
  }
  return out;
}

inline std::int64_t uniform_int(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
  return lo + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

inline double uniform_real(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) / 9007199254740992.0);
}

/// Sorted, non-overlapping sentences with random gaps inside [0, duration_ms].
inline std::vector<commentcast::TimedSentence> random_transcript(std::mt19937_64& rng, std::int64_t duration_ms,
                                                                 std::size_t max_sentences = 12) {
  std::vector<commentcast::TimedSentence> out;
  std::int64_t t = uniform_int(rng, 0, 4000);
  const auto n = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(max_sentences)));
  for (std::size_t i = 0; i < n; ++i) {
    const auto len = uniform_int(rng, 800, 5000);
    if (t + len > duration_ms) break;
    commentcast::TimedSentence s;
    s.index = static_cast<int>(i + 1);
    s.start_ms = t;
    s.end_ms = t + len;
    s.text = random_words(rng, static_cast<std::size_t>(uniform_int(rng, 3, 14)));
    out.push_back(std::move(s));
    t = out.back().end_ms + (rng() % 3 == 0 ? uniform_int(rng, 2001, 9000) : uniform_int(rng, 0, 2000));
  }
  return out;
}

inline std::vector<commentcast::DanmuComment> random_comments(std::mt19937_64& rng, std::int64_t duration_ms,
                                                              std::size_t count) {
  std::vector<commentcast::DanmuComment> out;
  for (std::size_t i = 0; i < count; ++i) {
    commentcast::DanmuComment c;
    c.video_time_ms = uniform_int(rng, 0, duration_ms);
    c.mode = static_cast<int>(uniform_int(rng, 1, 5));
    c.color = static_cast<std::uint32_t>(uniform_int(rng, 0, 0xFFFFFF));
    c.post_epoch_s = 1700000000 + uniform_int(rng, 0, 100000);
    c.user_hash = "u" + std::to_string(uniform_int(rng, 0, 99999));
    c.text = random_words(rng, static_cast<std::size_t>(uniform_int(rng, 1, 8)));
    out.push_back(std::move(c));
  }
  return out;
}

inline commentcast::PcmAudio sine(double freq_hz, double seconds, int rate, double amplitude = 1.0) {
  commentcast::PcmAudio a;
  a.sample_rate = rate;
  a.channels = 1;
  const auto n = static_cast<std::size_t>(std::llround(seconds * rate));
  a.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = amplitude * std::sin(2.0 * std::numbers::pi * freq_hz * static_cast<double>(i) / rate);
    a.samples[i] = static_cast<std::int16_t>(std::lround(std::clamp(x, -1.0, 1.0) * 32767.0));
  }
  return a;
}

// Power of `x` at `freq` by direct correlation with a complex exponential.
inline double tone_power(const std::vector<double>& x, double freq, int rate) {
  double re = 0.0;
  double im = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double w = 2.0 * std::numbers::pi * freq * static_cast<double>(n) / rate;
    re += x[n] * std::cos(w);
    im += x[n] * std::sin(w);
  }
  return re * re + im * im;
}

inline std::vector<double> as_doubles(const commentcast::PcmAudio& a, int channel = 0) {
  std::vector<double> out(a.frames());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = a.samples[i * static_cast<std::size_t>(a.channels) + static_cast<std::size_t>(channel)] / 32768.0;
  }
  return out;
}

}  // namespace testing_support
