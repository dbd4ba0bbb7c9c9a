#pragma once

#include "commentcast/audiomix.hpp"
#include "commentcast/curation.hpp"
#include "commentcast/digest.hpp"
#include "commentcast/error.hpp"
#include "commentcast/ingest.hpp"
#include "commentcast/optimizer.hpp"
#include "commentcast/providers.hpp"
#include "commentcast/providers/remote.hpp"
#include "commentcast/scoring.hpp"
#include "commentcast/segmentation.hpp"
#include "commentcast/timeline.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace commentcast {

namespace fs = std::filesystem;

enum class ProviderMode { Offline, Remote };

NLOHMANN_JSON_SERIALIZE_ENUM(ProviderMode, {{ProviderMode::Offline, "offline"}, {ProviderMode::Remote, "remote"}})
namespace text {
NLOHMANN_JSON_SERIALIZE_ENUM(WordCountMode, {{WordCountMode::CjkChars, "cjk_chars"}, {WordCountMode::Whitespace, "whitespace"}})
}  // namespace text

struct ProviderSettings {
  ProviderMode mode = ProviderMode::Offline;
  std::string base_url;
  double temperature = 0.8;
  double timeout_s = 30.0;
  int retries = 2;
  double backoff_initial_s = 0.5;
  std::map<std::string, std::string> prompts;
  std::map<std::string, int> creativity_pins;  // offline only: exact comment text -> rating
  std::string auth_env = "COMMENTCAST_API_TOKEN";
};

struct PipelineConfig {
  std::string video_ref;
  fs::path video_audio;
  fs::path transcript;
  fs::path danmu_xml;
  std::optional<fs::path> keyframes;
  ProviderSettings providers;
  ScoringConfig scoring;
  SegmentationConfig segmentation;
  text::WordCountMode word_count = text::WordCountMode::CjkChars;
  std::uint64_t seed = 0;
  fs::path output_dir = "out";
  std::optional<fs::path> cache_dir;

  CurationConfig curation() const {
    CurationConfig c;
    c.words_per_s = scoring.words_per_s;
    c.word_count = word_count;
    return c;
  }
  TimelineConfig timeline() const { return {scoring.words_per_s, word_count}; }
  SegmentationConfig segmentation_config() const {
    auto s = segmentation;
    s.word_count = word_count;
    return s;
  }
};

namespace pipeline {

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_text(const fs::path& path, const std::string& body) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!out) throw Error(ErrorCode::Io, "short write to " + path.string());
}

/// Reads a config document. Relative paths resolve against `base_dir`
/// (normally the config file's directory). Missing sections keep defaults.
inline PipelineConfig parse_config(const nlohmann::json& j, const fs::path& base_dir) {
  PipelineConfig c;
  const auto resolve = [&](const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  try {
    const auto& inputs = j.at("inputs");
    c.video_audio = resolve(inputs.at("video_audio").get<std::string>());
    c.transcript = resolve(inputs.at("transcript").get<std::string>());
    c.danmu_xml = resolve(inputs.at("danmu_xml").get<std::string>());
    if (inputs.contains("keyframes") && !inputs.at("keyframes").is_null()) {
      c.keyframes = resolve(inputs.at("keyframes").get<std::string>());
    }
    c.video_ref = j.value("video_ref", c.video_audio.stem().string());
    if (j.contains("providers")) {
      const auto& p = j.at("providers");
      c.providers.mode = p.value("mode", c.providers.mode);
      c.providers.base_url = p.value("base_url", c.providers.base_url);
      c.providers.temperature = p.value("temperature", c.providers.temperature);
      c.providers.timeout_s = p.value("timeout_s", c.providers.timeout_s);
      c.providers.retries = p.value("retries", c.providers.retries);
      c.providers.backoff_initial_s = p.value("backoff_initial_s", c.providers.backoff_initial_s);
      c.providers.prompts = p.value("prompts", c.providers.prompts);
      c.providers.creativity_pins = p.value("creativity_pins", c.providers.creativity_pins);
      c.providers.auth_env = p.value("auth_env", c.providers.auth_env);
    }
    if (j.contains("scoring")) j.at("scoring").get_to(c.scoring);
    if (j.contains("segmentation")) {
      const auto& s = j.at("segmentation");
      c.segmentation.gap_threshold_ms = s.value("gap_threshold_ms", c.segmentation.gap_threshold_ms);
      c.segmentation.volume_threshold = s.value("volume_threshold", c.segmentation.volume_threshold);
      c.segmentation.min_interval_ms = s.value("min_interval_ms", c.segmentation.min_interval_ms);
      c.segmentation.min_chunk_words = s.value("min_chunk_words", c.segmentation.min_chunk_words);
      c.segmentation.break_capacity_s = s.value("break_capacity_s", c.segmentation.break_capacity_s);
    }
    c.word_count = j.value("word_count_mode", c.word_count);
    c.seed = j.value("seed", c.seed);
    if (j.contains("output_dir")) c.output_dir = resolve(j.at("output_dir").get<std::string>());
    else c.output_dir = base_dir / "out";
    if (j.contains("cache_dir") && !j.at("cache_dir").is_null()) c.cache_dir = resolve(j.at("cache_dir").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
  c.scoring.validate();
  if (c.providers.mode == ProviderMode::Remote && c.providers.base_url.empty()) {
    throw Error(ErrorCode::InvalidConfig, "remote providers need providers.base_url");
  }
  return c;
}

inline PipelineConfig load_config(const fs::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
  }
  return parse_config(j, path.has_parent_path() ? path.parent_path() : fs::path("."));
}

/// Digest of every setting and input byte that can change an artifact.
/// Output and cache locations are deliberately left out.
inline std::string config_hash(const PipelineConfig& c) {
  const auto file_digest = [](const fs::path& p) { return digest::sha256_hex(read_text(p)); };
  nlohmann::json seg = {{"gap_threshold_ms", c.segmentation.gap_threshold_ms},
                        {"volume_threshold", c.segmentation.volume_threshold},
                        {"min_interval_ms", c.segmentation.min_interval_ms},
                        {"min_chunk_words", c.segmentation.min_chunk_words},
                        {"break_capacity_s", c.segmentation.break_capacity_s}};
  nlohmann::json prov = {{"mode", c.providers.mode},
                         {"base_url", c.providers.mode == ProviderMode::Remote ? c.providers.base_url : ""},
                         {"temperature", c.providers.temperature},
                         {"prompts", c.providers.prompts},
                         {"creativity_pins", c.providers.creativity_pins}};
  nlohmann::json doc = {{"video_ref", c.video_ref},
                        {"inputs",
                         {{"video_audio", file_digest(c.video_audio)},
                          {"transcript", file_digest(c.transcript)},
                          {"danmu_xml", file_digest(c.danmu_xml)},
                          {"keyframes", c.keyframes ? file_digest(*c.keyframes) : ""}}},
                        {"providers", prov},
                        {"scoring", c.scoring},
                        {"segmentation", seg},
                        {"word_count_mode", c.word_count},
                        {"seed", c.seed}};
  return digest::sha256_hex(doc.dump());
}

/// The configured engine, optionally behind the response cache.
class EngineStack {
 public:
  EngineStack(const PipelineConfig& config, const std::vector<TimedSentence>& sentences) {
    if (config.providers.mode == ProviderMode::Offline) {
      providers::offline::OfflineOptions o;
      std::vector<std::string> texts;
      for (const auto& s : sentences) texts.push_back(s.text);
      o.language_corpus = text::join(texts, "\n");
      o.creativity_pins = config.providers.creativity_pins;
      base_ = std::make_unique<providers::offline::OfflineEngine>(std::move(o));
    } else {
      providers::RemoteOptions o;
      o.base_url = config.providers.base_url;
      o.timeout_s = config.providers.timeout_s;
      o.retries = config.providers.retries;
      o.backoff_initial_s = config.providers.backoff_initial_s;
      o.temperature = config.providers.temperature;
      o.prompts = config.providers.prompts;
      if (const char* token = std::getenv(config.providers.auth_env.c_str())) o.auth_token = token;
      base_ = std::make_unique<providers::RemoteEngine>(std::move(o));
    }
    if (config.cache_dir) {
      cached_ = std::make_unique<providers::CachedEngine>(*base_, providers::ProviderCache(*config.cache_dir));
    }
  }

  const providers::Engine& engine() const { return cached_ ? *cached_ : *base_; }

 private:
  std::unique_ptr<providers::Engine> base_;
  std::unique_ptr<providers::CachedEngine> cached_;
};

struct Inputs {
  std::vector<TimedSentence> sentences;
  std::vector<DanmuComment> comments;
  std::vector<KeyframeRef> keyframes;
  PcmAudio audio;
  VolumeEnvelope envelope;
  std::int64_t duration_ms = 0;
};

inline std::vector<TimedSentence> load_transcript(const PipelineConfig& c) {
  return ingest::parse_transcript(read_text(c.transcript));
}

inline Inputs load_inputs(const PipelineConfig& c) {
  Inputs in;
  in.sentences = load_transcript(c);
  in.comments = ingest::parse_danmu_xml(read_text(c.danmu_xml));
  if (c.keyframes) in.keyframes = ingest::parse_keyframes(read_text(*c.keyframes));
  in.audio = wav::read_file(c.video_audio);
  in.envelope = ingest::compute_envelope(in.audio);
  in.duration_ms = in.audio.duration_ms();
  return in;
}

struct PlanResult {
  std::vector<CandidateSet> candidates;
  std::vector<InsertionScore> insertion_scores;
  Assignment assignment;
  TimelineManifest manifest;
};

/// Scores curated topics, picks candidates, solves, and builds the manifest.
/// Topics left without a candidate point are discarded with a warning.
inline PlanResult plan(std::vector<Topic>& topics, const segmentation::SegmentationResult& seg,
                       const std::vector<TimedSentence>& sentences, const std::vector<DanmuComment>& comments,
                       std::int64_t duration_ms, const providers::Providers& providers, const PipelineConfig& config,
                       Warnings* warnings = nullptr) {
  PlanResult r;
  scoring::score_topics(topics, seg.segments, sentences, providers, config.scoring);
  std::map<int, const Segment*> segment_by_id;
  for (const auto& s : seg.segments) segment_by_id[s.id] = &s;
  std::map<int, const InsertionPoint*> point_by_id;
  for (const auto& p : seg.points) point_by_id[p.id] = &p;
  for (const auto& t : topics) {
    CandidateSet set;
    set.topic_id = t.id;
    try {
      set.point_ids = optimizer::candidate_points(segment_by_id.at(t.segment_id)->midpoint_ms(), seg.points);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoCandidates) throw;
      if (warnings) warnings->add("topic " + std::to_string(t.id) + " discarded: no insertion point");
      continue;
    }
    std::vector<const InsertionPoint*> pts;
    for (int id : set.point_ids) pts.push_back(point_by_id.at(id));
    auto scores = scoring::score_insertions(t, pts, providers, config.scoring);
    r.insertion_scores.insert(r.insertion_scores.end(), scores.begin(), scores.end());
    r.candidates.push_back(std::move(set));
  }
  r.assignment = optimizer::solve(topics, seg.points, r.candidates, r.insertion_scores, config.scoring);
  const timeline::TimelineInputs ti{topics, seg.points, r.assignment, seg.segments, seg.breaks, sentences, comments};
  r.manifest = timeline::build_manifest(ti, duration_ms, config.seed, config.timeline(), warnings);
  r.manifest.video_ref = config.video_ref;
  return r;
}

// ---- staged commands --------------------------------------------------------

enum class Stage { Segment, Curate, Plan, Render, All };

inline std::optional<Stage> parse_stage(std::string_view s) {
  if (s == "segment") return Stage::Segment;
  if (s == "curate") return Stage::Curate;
  if (s == "plan") return Stage::Plan;
  if (s == "render") return Stage::Render;
  if (s == "all") return Stage::All;
  return std::nullopt;
}

struct StageReport {
  std::vector<fs::path> written;
  Warnings warnings;
};

namespace detail {

inline void write_json(const fs::path& path, const nlohmann::json& doc, StageReport& report) {
  write_text(path, doc.dump(2) + "\n");
  report.written.push_back(path);
}

inline nlohmann::json read_artifact(const PipelineConfig& c, const std::string& file, std::string_view producer,
                                    std::string_view consumer, const std::string& hash) {
  const auto path = c.output_dir / file;
  if (!fs::exists(path)) {
    throw Error(ErrorCode::MissingStage, std::string(consumer) + " needs " + file + "; run the " +
                                             std::string(producer) + " stage first");
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidInput, path.string() + ": " + e.what());
  }
  if (doc.value("config_hash", std::string{}) != hash) {
    throw Error(ErrorCode::StaleInput, file + " was produced under a different configuration; rerun the " +
                                           std::string(producer) + " stage");
  }
  return doc;
}

inline void record_warnings(nlohmann::json& doc, const Warnings& w) { doc["warnings"] = w.items(); }

}  // namespace detail

inline StageReport cmd_segment(const PipelineConfig& c) {
  StageReport report;
  const auto hash = config_hash(c);
  const auto in = load_inputs(c);
  EngineStack engines(c, in.sentences);
  const providers::Providers p(engines.engine(), &report.warnings);
  const auto seg = segmentation::segment_video(in.sentences, in.envelope, in.duration_ms, p, c.segmentation_config());
  nlohmann::json doc = {{"stage", "segment"},
                        {"config_hash", hash},
                        {"duration_ms", in.duration_ms},
                        {"sentences", in.sentences},
                        {"segments", seg.segments},
                        {"breaks", seg.breaks},
                        {"insertable", seg.insertable},
                        {"points", seg.points}};
  detail::record_warnings(doc, report.warnings);
  detail::write_json(c.output_dir / "segments.json", doc, report);
  return report;
}

inline segmentation::SegmentationResult segmentation_from(const nlohmann::json& doc) {
  segmentation::SegmentationResult seg;
  doc.at("segments").get_to(seg.segments);
  doc.at("breaks").get_to(seg.breaks);
  doc.at("insertable").get_to(seg.insertable);
  doc.at("points").get_to(seg.points);
  return seg;
}

inline StageReport cmd_curate(const PipelineConfig& c) {
  StageReport report;
  const auto hash = config_hash(c);
  const auto segdoc = detail::read_artifact(c, "segments.json", "segment", "curate", hash);
  const auto sentences = segdoc.at("sentences").get<std::vector<TimedSentence>>();
  const auto seg = segmentation_from(segdoc);
  const auto comments = ingest::parse_danmu_xml(read_text(c.danmu_xml));
  std::vector<KeyframeRef> keyframes;
  if (c.keyframes) keyframes = ingest::parse_keyframes(read_text(*c.keyframes));
  EngineStack engines(c, sentences);
  const providers::Providers p(engines.engine(), &report.warnings);
  const auto result = curation::curate(seg.segments, comments, keyframes, p, c.curation(), &report.warnings);
  nlohmann::json doc = {{"stage", "curate"},
                        {"config_hash", hash},
                        {"topics", result.topics},
                        {"reports", result.reports},
                        {"out_of_range", result.out_of_range}};
  detail::record_warnings(doc, report.warnings);
  detail::write_json(c.output_dir / "topics.json", doc, report);
  return report;
}

inline StageReport cmd_plan(const PipelineConfig& c) {
  StageReport report;
  const auto hash = config_hash(c);
  const auto topicdoc = detail::read_artifact(c, "topics.json", "curate", "plan", hash);
  const auto segdoc = detail::read_artifact(c, "segments.json", "segment", "plan", hash);
  const auto sentences = segdoc.at("sentences").get<std::vector<TimedSentence>>();
  const auto seg = segmentation_from(segdoc);
  auto topics = topicdoc.at("topics").get<std::vector<Topic>>();
  const auto comments = ingest::parse_danmu_xml(read_text(c.danmu_xml));
  EngineStack engines(c, sentences);
  const providers::Providers p(engines.engine(), &report.warnings);
  auto result = plan(topics, seg, sentences, comments, segdoc.at("duration_ms").get<std::int64_t>(), p, c,
                     &report.warnings);
  result.manifest.config_hash = hash;
  nlohmann::json doc = {{"stage", "plan"},
                        {"config_hash", hash},
                        {"topics", topics},
                        {"candidates", result.candidates},
                        {"insertion_scores", result.insertion_scores},
                        {"assignment", result.assignment}};
  detail::record_warnings(doc, report.warnings);
  detail::write_json(c.output_dir / "assignment.json", doc, report);
  detail::write_json(c.output_dir / "manifest.json", result.manifest, report);
  return report;
}

inline StageReport cmd_render(const PipelineConfig& c) {
  StageReport report;
  const auto hash = config_hash(c);
  const auto mdoc = detail::read_artifact(c, "manifest.json", "plan", "render", hash);
  const auto manifest = mdoc.get<TimelineManifest>();
  const auto sentences = load_transcript(c);
  EngineStack engines(c, sentences);
  const providers::Providers p(engines.engine(), &report.warnings);

  audiomix::MixAssets assets;
  for (const auto& entry : manifest.entries) {
    for (const auto& line : entry.lines) {
      auto audio = audiomix::render_line(line, p, &report.warnings);
      const auto path = c.output_dir / manifest.assets.at(line.id);
      wav::write_file(path, audio);
      report.written.push_back(path);
      assets.lines.emplace(line.id, std::move(audio));
    }
  }
  for (auto side : {NotifySide::Left, NotifySide::Right}) {
    const auto path = c.output_dir / timeline::notification_asset_path(side);
    wav::write_file(path, audiomix::render_notification(side));
    report.written.push_back(path);
  }
  const auto video = wav::read_file(c.video_audio);
  const auto preview = audiomix::mixdown(manifest, video, assets);
  wav::write_file(c.output_dir / "preview.wav", preview);
  report.written.push_back(c.output_dir / "preview.wav");
  return report;
}

inline StageReport run(Stage stage, const PipelineConfig& c) {
  switch (stage) {
    case Stage::Segment: return cmd_segment(c);
    case Stage::Curate: return cmd_curate(c);
    case Stage::Plan: return cmd_plan(c);
    case Stage::Render: return cmd_render(c);
    case Stage::All: break;
  }
  StageReport all;
  for (auto s : {Stage::Segment, Stage::Curate, Stage::Plan, Stage::Render}) {
    auto r = run(s, c);
    all.written.insert(all.written.end(), r.written.begin(), r.written.end());
    for (const auto& w : r.warnings.items()) all.warnings.add(w);
  }
  return all;
}

}  // namespace pipeline
}  // namespace commentcast
