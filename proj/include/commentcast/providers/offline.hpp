#pragma once

#include "commentcast/error.hpp"
#include "commentcast/ingest/wav.hpp"
#include "commentcast/providers/engine.hpp"
#include "commentcast/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

// Deterministic offline implementations of every provider capability. None of
// these try to match a hosted model; they exist so the whole pipeline runs and
// tests without network access, with answers that are stable across runs.
namespace commentcast::providers::offline {

inline constexpr std::size_t kEmbeddingDim = 256;
inline constexpr int kTtsSampleRate = 44100;
inline constexpr double kTtsRate = 1.15;

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Hashed bag of words, L2-normalized. Word order does not matter.
inline std::vector<double> embed(std::string_view text) {
  std::vector<double> v(kEmbeddingDim, 0.0);
  auto tokens = text::tokenize(text);
  if (tokens.empty()) tokens.emplace_back(text::trim(text));
  for (const auto& t : tokens) v[fnv1a64(t) % kEmbeddingDim] += 1.0;
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / std::sqrt(na * nb);
}

// Creativity heuristic on a 1-10 scale: lexical novelty (share of distinct
// non-stopword tokens), long-word rarity and exclamation/question surprise.
// Exact-text pins override the heuristic for golden fixtures.
inline int rate_creativity(std::string_view text, const std::map<std::string, int>& pins = {}) {
  if (auto it = pins.find(std::string(text::trim(text))); it != pins.end()) {
    return std::clamp(it->second, 1, 10);
  }
  const auto tokens = text::tokenize(text);
  if (tokens.empty()) return 1;
  std::set<std::string> distinct;
  for (const auto& t : tokens) {
    if (!text::is_stopword(t)) distinct.insert(t);
  }
  const double novelty = static_cast<double>(distinct.size()) / static_cast<double>(tokens.size());
  std::size_t long_words = 0;
  for (const auto& t : distinct) {
    if (text::code_points(t).size() >= 7) ++long_words;
  }
  const double rarity = distinct.empty() ? 0.0 : static_cast<double>(long_words) / static_cast<double>(distinct.size());
  const auto marks = std::count_if(text.begin(), text.end(), [](char c) { return c == '!' || c == '?'; });
  const double surprise = std::min(1.0, static_cast<double>(marks) / 3.0);
  const double score = 1.0 + 5.0 * novelty + 2.0 * rarity + 2.0 * surprise;
  return std::clamp(static_cast<int>(std::floor(score + 0.5)), 1, 10);
}

inline Sentiment sentiment(std::string_view text) {
  static const std::set<std::string, std::less<>> kPositive = {
      "good",    "great",    "love",     "loved",   "lovely",  "favorite", "favourite", "nice",
      "awesome", "amazing",  "cool",     "beautiful", "pretty", "tasty",   "delicious", "yummy",
      "best",    "wow",      "haha",     "hahaha",  "lol",     "funny",    "cute",      "happy",
      "perfect", "excellent", "wonderful", "enjoy", "fantastic", "fun",    "brilliant", "impressive",
      "genius",  "thanks",   "thank",    "agree",   "smart",   "sweet",    "classic",   "legend",
      "legendary", "respect", "glad",    "好",      "棒",      "赞",       "爱",        "美",
      "甜",      "强"};
  static const std::set<std::string, std::less<>> kNegative = {
      "bad",     "sour",     "terrible", "awful",   "hate",    "hated",    "worst",     "boring",
      "ugly",    "sad",      "wrong",    "disgusting", "annoying", "poor", "weird",     "scary",
      "gross",   "cringe",   "fake",     "lame",    "stupid",  "dumb",     "expensive", "overpriced",
      "bitter",  "salty",    "fail",     "failed",  "broken",  "noisy",    "disappointed",
      "disappointing", "meh", "sucks",   "horrible", "nasty",  "差",       "丑",        "烂",
      "贵",      "苦",       "酸"};
  static const std::set<std::string, std::less<>> kNegators = {
      "not", "no", "never", "don't", "isn't", "wasn't", "doesn't", "can't", "didn't", "aren't", "不", "没"};

  int score = 0;
  int negate_window = 0;
  for (const auto& t : text::tokenize(text)) {
    if (kNegators.contains(t)) {
      negate_window = 3;
      continue;
    }
    int polarity = kPositive.contains(t) ? 1 : kNegative.contains(t) ? -1 : 0;
    if (polarity != 0 && negate_window > 0) polarity = -polarity;
    score += polarity;
    if (negate_window > 0) --negate_window;
  }
  return score > 0 ? Sentiment::Positive : score < 0 ? Sentiment::Negative : Sentiment::Neutral;
}

/// Character trigram language model with linear interpolation down to an
/// add-one unigram, so every probability is strictly positive.
class TrigramModel {
 public:
  TrigramModel() = default;
  explicit TrigramModel(std::string_view corpus) { train(corpus); }

  void train(std::string_view corpus) {
    const auto symbols = normalize(corpus);
    for (std::size_t i = 0; i < symbols.size(); ++i) {
      const char32_t c = symbols[i];
      const char32_t b = i >= 1 ? symbols[i - 1] : kBoundary;
      const char32_t a = i >= 2 ? symbols[i - 2] : kBoundary;
      ++unigram_[c];
      ++bigram_[pair_key(b, c)];
      ++bigram_context_[b];
      ++trigram_[triple_key(a, b, c)];
      ++trigram_context_[pair_key(a, b)];
      ++total_;
    }
    vocabulary_ = unigram_.size() + 1;  // + unknown
  }

  // Sum of log P over the candidate's characters plus the two characters that
  // lead into the following context.
  double logprob(std::string_view before, std::string_view candidate, std::string_view after) const {
    const auto head = normalize(before);
    const auto cand = normalize(candidate);
    const auto tail = normalize(after);
    char32_t a = kBoundary;
    char32_t b = kBoundary;
    if (!head.empty()) {
      a = head.back();
      b = ' ';
    }
    std::vector<char32_t> scored = cand;
    if (!tail.empty()) {
      scored.push_back(' ');
      scored.push_back(tail.front());
    }
    double sum = 0.0;
    for (char32_t c : scored) {
      sum += std::log(probability(a, b, c));
      a = b;
      b = c;
    }
    return sum;
  }

  std::size_t size() const { return total_; }

 private:
  static constexpr char32_t kBoundary = 0x0002;
  static constexpr char32_t kUnknown = 0xFFFFFFFF;

  static std::uint64_t pair_key(char32_t a, char32_t b) { return (static_cast<std::uint64_t>(a) << 32) | b; }
  static std::string triple_key(char32_t a, char32_t b, char32_t c) {
    std::string k(12, '\0');
    for (int i = 0; i < 4; ++i) {
      k[i] = static_cast<char>(a >> (8 * i));
      k[4 + i] = static_cast<char>(b >> (8 * i));
      k[8 + i] = static_cast<char>(c >> (8 * i));
    }
    return k;
  }

  // Lowercase ASCII, collapse whitespace runs to one space.
  static std::vector<char32_t> normalize(std::string_view s) {
    std::vector<char32_t> out;
    bool space = false;
    for (char32_t cp : text::code_points(s)) {
      if (text::is_space(cp)) {
        space = !out.empty();
        continue;
      }
      if (space) out.push_back(' ');
      space = false;
      out.push_back(cp >= 'A' && cp <= 'Z' ? cp - 'A' + 'a' : cp);
    }
    return out;
  }

  double probability(char32_t a, char32_t b, char32_t c) const {
    const char32_t key = unigram_.contains(c) || c == ' ' ? c : kUnknown;
    const auto find = [](const auto& map, const auto& k) -> double {
      const auto it = map.find(k);
      return it == map.end() ? 0.0 : static_cast<double>(it->second);
    };
    const double p1 = (find(unigram_, key) + 1.0) / (static_cast<double>(total_) + static_cast<double>(vocabulary_));
    const double ctx2 = find(bigram_context_, b);
    const double p2 = ctx2 > 0.0 ? find(bigram_, pair_key(b, key)) / ctx2 : 0.0;
    const double ctx3 = find(trigram_context_, pair_key(a, b));
    const double p3 = ctx3 > 0.0 ? find(trigram_, triple_key(a, b, key)) / ctx3 : 0.0;
    return 0.6 * p3 + 0.3 * p2 + 0.1 * p1;
  }

  std::unordered_map<char32_t, std::size_t> unigram_;
  std::unordered_map<std::uint64_t, std::size_t> bigram_;
  std::unordered_map<char32_t, std::size_t> bigram_context_;
  std::unordered_map<std::string, std::size_t> trigram_;
  std::unordered_map<std::uint64_t, std::size_t> trigram_context_;
  std::size_t total_ = 0;
  std::size_t vocabulary_ = 1;
};

struct TopicDraft {
  std::string summary;
  std::vector<std::size_t> members;
};

inline double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t common = 0;
  for (const auto& t : a) common += b.contains(t) ? 1 : 0;
  return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

inline std::set<std::string> token_set(std::string_view text) {
  auto tokens = text::content_tokens(text);
  if (tokens.empty()) return {text::normalize_for_dedup(text)};
  return {tokens.begin(), tokens.end()};
}

// Greedy single-link clustering: each comment joins the cluster holding its
// most similar member when that similarity reaches the threshold, otherwise it
// opens a new cluster. Each cluster is titled by its most frequent content token.
inline std::vector<TopicDraft> group_topics(const std::vector<std::string>& texts, double threshold = 0.2) {
  std::vector<std::set<std::string>> sets;
  sets.reserve(texts.size());
  for (const auto& t : texts) sets.push_back(token_set(t));

  std::vector<TopicDraft> clusters;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    std::optional<std::size_t> best;
    double best_sim = -1.0;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      for (std::size_t m : clusters[c].members) {
        const double sim = jaccard(sets[i], sets[m]);
        if (sim > best_sim) {
          best_sim = sim;
          best = c;
        }
      }
    }
    if (best && best_sim >= threshold) {
      clusters[*best].members.push_back(i);
    } else {
      clusters.push_back({{}, {i}});
    }
  }

  for (auto& cluster : clusters) {
    std::map<std::string, std::size_t> freq;
    std::vector<std::string> first_seen;
    for (std::size_t m : cluster.members) {
      for (const auto& t : text::content_tokens(texts[m])) {
        if (freq[t]++ == 0) first_seen.push_back(t);
      }
    }
    std::size_t best_count = 0;
    for (const auto& t : first_seen) {
      if (freq[t] > best_count) {
        best_count = freq[t];
        cluster.summary = t;
      }
    }
    if (cluster.summary.empty()) cluster.summary = std::string(text::trim(texts[cluster.members.front()]));
  }
  return clusters;
}

struct KeyframeCaption {
  std::int64_t time_ms = 0;
  std::optional<std::string> caption_hint;
};

// Describes a topic with the caption of the keyframe sharing the most content
// tokens with it; "None" when no caption overlaps.
inline std::vector<std::string> visual_describe(const std::vector<std::string>& topic_texts,
                                                const std::vector<KeyframeCaption>& keyframes) {
  std::vector<std::string> out;
  out.reserve(topic_texts.size());
  for (const auto& topic : topic_texts) {
    const auto topic_tokens = token_set(topic);
    std::size_t best_overlap = 0;
    std::string best = "None";
    for (const auto& frame : keyframes) {
      if (!frame.caption_hint || text::is_blank(*frame.caption_hint)) continue;
      std::size_t overlap = 0;
      for (const auto& t : token_set(*frame.caption_hint)) overlap += topic_tokens.contains(t) ? 1 : 0;
      if (overlap > best_overlap) {
        best_overlap = overlap;
        best = *frame.caption_hint;
      }
    }
    out.push_back(best);
  }
  return out;
}

// Proposes a split after sentence k when the content vocabulary of the two
// sentences up to k and the two sentences after k barely overlap.
inline std::vector<std::size_t> segment_split(const std::vector<std::string>& sentences, double threshold = 0.1) {
  std::vector<std::size_t> splits;
  const auto window = [&](std::size_t from, std::size_t to) {
    std::set<std::string> s;
    for (std::size_t k = from; k <= to; ++k) {
      for (auto& t : text::content_tokens(sentences[k])) s.insert(std::move(t));
    }
    return s;
  };
  for (std::size_t k = 0; k + 1 < sentences.size(); ++k) {
    const auto left = window(k == 0 ? 0 : k - 1, k);
    const auto right = window(k + 1, std::min(sentences.size() - 1, k + 2));
    if (jaccard(left, right) < threshold) splits.push_back(k);
  }
  return splits;
}

constexpr double tone_frequency_hz(Tone tone) {
  switch (tone) {
    case Tone::Narrator: return 220.0;
    case Tone::V1: return 330.0;
    case Tone::V2: return 440.0;
    case Tone::V3: return 550.0;
  }
  return 440.0;
}

// Tone-coded beep train lasting exactly target/1.15 seconds: 150 ms beeps at
// the tone's fundamental separated by 50 ms of silence, with 5 ms ramps.
inline PcmAudio synthesize(Tone tone, double target_duration_s) {
  PcmAudio audio;
  audio.sample_rate = kTtsSampleRate;
  audio.channels = 1;
  const auto frames = static_cast<std::size_t>(std::llround(target_duration_s / kTtsRate * kTtsSampleRate));
  audio.samples.resize(frames);
  const double freq = tone_frequency_hz(tone);
  const std::size_t beep = kTtsSampleRate * 150 / 1000;
  const std::size_t cycle = kTtsSampleRate * 200 / 1000;
  const std::size_t ramp = kTtsSampleRate * 5 / 1000;
  for (std::size_t n = 0; n < frames; ++n) {
    const std::size_t phase = n % cycle;
    if (phase >= beep) continue;
    double gain = 1.0;
    if (phase < ramp) gain = static_cast<double>(phase) / ramp;
    else if (beep - phase < ramp) gain = static_cast<double>(beep - phase) / ramp;
    const double t = static_cast<double>(n) / kTtsSampleRate;
    const double x = 0.5 * gain * std::sin(2.0 * std::numbers::pi * freq * t);
    audio.samples[n] = static_cast<std::int16_t>(std::lround(x * 32767.0));
  }
  return audio;
}

struct OfflineOptions {
  std::string language_corpus;               // transcript text the trigram model learns from
  std::map<std::string, int> creativity_pins;
  double topic_jaccard = 0.2;
  double split_jaccard = 0.1;
};

/// Engine backed by the functions above. Stateless after construction.
class OfflineEngine final : public Engine {
 public:
  explicit OfflineEngine(OfflineOptions options = {})
      : options_(std::move(options)), model_(options_.language_corpus) {}

  std::string fingerprint() const override {
    nlohmann::json j = {{"engine", "offline-v1"},
                        {"corpus", digest::sha256_hex(options_.language_corpus)},
                        {"pins", options_.creativity_pins},
                        {"topic_jaccard", options_.topic_jaccard},
                        {"split_jaccard", options_.split_jaccard}};
    return j.dump();
  }

  nlohmann::json invoke(const ProviderRequest& request) const override {
    const auto& p = request.payload;
    try {
      switch (request.capability) {
        case Capability::Embed:
          return embed(p.at("text").get<std::string>());
        case Capability::CreativityRate:
          return rate_creativity(p.at("text").get<std::string>(), options_.creativity_pins);
        case Capability::Sentiment:
          return std::string(wire_name(sentiment(p.at("text").get<std::string>())));
        case Capability::LogProb:
          return model_.logprob(p.at("context_before").get<std::string>(), p.at("candidate").get<std::string>(),
                                p.at("context_after").get<std::string>());
        case Capability::TopicModel: {
          std::vector<std::string> texts;
          for (const auto& c : p.at("comments")) texts.push_back(c.at("text").get<std::string>());
          nlohmann::json out = nlohmann::json::array();
          for (const auto& draft : group_topics(texts, options_.topic_jaccard)) {
            nlohmann::json indices = nlohmann::json::array();
            for (auto m : draft.members) indices.push_back(p.at("comments")[m].at("index"));
            out.push_back({{"summary", draft.summary}, {"comment_indices", indices}});
          }
          return out;
        }
        case Capability::DialogueReorder: {
          // Chronological: video time, then post time, then user hash.
          struct Row {
            std::int64_t time_ms, epoch;
            std::string user;
            nlohmann::json index;
          };
          std::vector<Row> rows;
          for (const auto& c : p.at("comments")) {
            rows.push_back({c.at("time_ms").get<std::int64_t>(), c.value("post_epoch_s", std::int64_t{0}),
                            c.value("user_hash", std::string{}), c.at("index")});
          }
          std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
            return std::tie(a.time_ms, a.epoch, a.user) < std::tie(b.time_ms, b.epoch, b.user);
          });
          nlohmann::json out = nlohmann::json::array();
          for (const auto& r : rows) out.push_back(r.index);
          return out;
        }
        case Capability::VisualDescribe: {
          std::vector<std::string> topics;
          for (const auto& t : p.at("topics")) {
            std::string joined = t.at("summary").get<std::string>();
            for (const auto& c : t.at("comments")) joined += " " + c.get<std::string>();
            topics.push_back(std::move(joined));
          }
          std::vector<KeyframeCaption> frames;
          for (const auto& k : p.at("keyframes")) {
            KeyframeCaption f;
            f.time_ms = k.at("time_ms").get<std::int64_t>();
            if (auto it = k.find("caption_hint"); it != k.end() && it->is_string()) f.caption_hint = it->get<std::string>();
            frames.push_back(std::move(f));
          }
          return visual_describe(topics, frames);
        }
        case Capability::SegmentSplit: {
          return segment_split(p.at("sentences").get<std::vector<std::string>>(), options_.split_jaccard);
        }
        case Capability::Tts:
          break;
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ProviderFailure,
                  "offline " + std::string(wire_name(request.capability)) + ": bad payload: " + e.what());
    }
    throw Error(ErrorCode::ProviderFailure, "tts is served by synthesize()");
  }

  PcmAudio synthesize(const ProviderRequest& request) const override {
    try {
      const auto tone = parse_tone(request.payload.at("tone").get<std::string>());
      const double target = request.payload.at("target_duration_s").get<double>();
      if (!tone || !(target > 0.0)) throw Error(ErrorCode::ProviderFailure, "offline tts: bad tone or duration");
      return offline::synthesize(*tone, target);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ProviderFailure, std::string("offline tts: bad payload: ") + e.what());
    }
  }

  const OfflineOptions& options() const { return options_; }

 private:
  OfflineOptions options_;
  TrigramModel model_;
};

}  // namespace commentcast::providers::offline
