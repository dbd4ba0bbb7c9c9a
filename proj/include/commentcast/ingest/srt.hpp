#pragma once

#include "commentcast/error.hpp"
#include "commentcast/ingest/types.hpp"
#include "commentcast/text.hpp"

#include <algorithm>
#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace commentcast::ingest {

namespace detail {

// HH:MM:SS,mmm (a '.' separator is tolerated). Returns nullopt on bad syntax.
inline std::optional<std::int64_t> parse_srt_clock(std::string_view s) {
  s = text::trim(s);
  const auto field = [&](std::size_t pos, std::size_t len, int max) -> std::optional<int> {
    if (pos + len > s.size()) return std::nullopt;
    int value = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
      if (s[i] < '0' || s[i] > '9') return std::nullopt;
      value = value * 10 + (s[i] - '0');
    }
    if (value > max) return std::nullopt;
    return value;
  };
  // Hours may have more than two digits.
  const auto colon = s.find(':');
  if (colon == std::string_view::npos || colon == 0 || s.size() != colon + 10) return std::nullopt;
  const auto hours = field(0, colon, 1'000'000);
  const auto minutes = field(colon + 1, 2, 59);
  const auto seconds = field(colon + 4, 2, 59);
  const auto millis = field(colon + 7, 3, 999);
  if (s[colon + 3] != ':' || (s[colon + 6] != ',' && s[colon + 6] != '.')) return std::nullopt;
  if (!hours || !minutes || !seconds || !millis) return std::nullopt;
  return ((static_cast<std::int64_t>(*hours) * 60 + *minutes) * 60 + *seconds) * 1000 + *millis;
}

inline std::vector<std::string_view> split_lines(std::string_view raw) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= raw.size()) {
    auto end = raw.find('\n', start);
    if (end == std::string_view::npos) end = raw.size();
    auto line = raw.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (end == raw.size()) break;
    start = end + 1;
  }
  return lines;
}

inline bool is_index_line(std::string_view line) {
  line = text::trim(line);
  return !line.empty() && std::all_of(line.begin(), line.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace detail

/// Parses SubRip text into sentences sorted by start time.
///
/// Cue text lines are joined with single spaces and character entities are
/// decoded; no other markup is touched. Line numbers in errors are 1-based.
inline std::vector<TimedSentence> parse_transcript(std::string_view raw) {
  if (raw.size() >= 3 && raw.substr(0, 3) == "\xEF\xBB\xBF") raw.remove_prefix(3);
  const auto lines = detail::split_lines(raw);

  std::vector<TimedSentence> cues;
  std::size_t i = 0;
  int ordinal = 0;
  while (i < lines.size()) {
    if (text::is_blank(lines[i])) {
      ++i;
      continue;
    }
    TimedSentence cue;
    ++ordinal;
    cue.index = ordinal;
    std::size_t timing_line = i;
    if (lines[i].find("-->") == std::string_view::npos) {
      if (!detail::is_index_line(lines[i]) || i + 1 >= lines.size()) {
        throw Error(ErrorCode::MalformedTimestamp,
                    "expected cue index or timing at line " + std::to_string(i + 1));
      }
      const auto idx = text::trim(lines[i]);
      std::from_chars(idx.data(), idx.data() + idx.size(), cue.index);
      timing_line = i + 1;
    }
    const auto timing = lines[timing_line];
    const auto arrow = timing.find("-->");
    if (arrow == std::string_view::npos) {
      throw Error(ErrorCode::MalformedTimestamp,
                  "missing '-->' at line " + std::to_string(timing_line + 1));
    }
    // Anything after the end clock (position hints) is ignored.
    auto end_part = text::trim(timing.substr(arrow + 3));
    if (const auto sp = end_part.find_first_of(" \t"); sp != std::string_view::npos) {
      end_part = end_part.substr(0, sp);
    }
    const auto start = detail::parse_srt_clock(timing.substr(0, arrow));
    const auto end = detail::parse_srt_clock(end_part);
    if (!start || !end) {
      throw Error(ErrorCode::MalformedTimestamp,
                  "bad time syntax at line " + std::to_string(timing_line + 1));
    }
    if (*start >= *end) {
      throw Error(ErrorCode::MalformedTimestamp,
                  "cue start not before end at line " + std::to_string(timing_line + 1));
    }
    cue.start_ms = *start;
    cue.end_ms = *end;

    std::vector<std::string> text_lines;
    i = timing_line + 1;
    while (i < lines.size() && !text::is_blank(lines[i])) {
      text_lines.emplace_back(text::trim(lines[i]));
      ++i;
    }
    cue.text = text::decode_entities(text::join(text_lines, " "));
    cues.push_back(std::move(cue));
  }

  std::stable_sort(cues.begin(), cues.end(),
                   [](const TimedSentence& a, const TimedSentence& b) { return a.start_ms < b.start_ms; });
  for (std::size_t k = 1; k < cues.size(); ++k) {
    if (cues[k].start_ms < cues[k - 1].end_ms) {
      throw Error(ErrorCode::OverlapError, "cue " + std::to_string(cues[k].index) +
                                               " overlaps cue " + std::to_string(cues[k - 1].index));
    }
  }
  return cues;
}

}  // namespace commentcast::ingest
