#pragma once

#include "commentcast/error.hpp"
#include "commentcast/ingest/types.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace commentcast::ingest {

// Keyframe index: a JSON array of {time_ms, image_path, caption_hint?} with
// strictly increasing times.
inline std::vector<KeyframeRef> parse_keyframes(std::string_view raw) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidInput, std::string("keyframe index: ") + e.what());
  }
  if (!doc.is_array()) throw Error(ErrorCode::InvalidInput, "keyframe index must be a JSON array");
  std::vector<KeyframeRef> frames;
  frames.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    try {
      frames.push_back(doc[i].get<KeyframeRef>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::InvalidInput, "keyframe " + std::to_string(i) + ": " + e.what());
    }
    if (frames.back().time_ms < 0) {
      throw Error(ErrorCode::InvalidInput, "keyframe " + std::to_string(i) + " has negative time");
    }
    if (i > 0 && frames[i].time_ms <= frames[i - 1].time_ms) {
      throw Error(ErrorCode::InvalidInput, "keyframe times must be strictly increasing (entry " + std::to_string(i) + ")");
    }
  }
  return frames;
}

}  // namespace commentcast::ingest
