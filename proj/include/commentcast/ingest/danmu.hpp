#pragma once

#include "commentcast/error.hpp"
#include "commentcast/ingest/types.hpp"
#include "commentcast/text.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <algorithm>
#include <charconv>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace commentcast::ingest {

namespace detail {

// Decimal seconds ("12.5", "3", "0.0005") to integer milliseconds, rounding
// half up on the decimal digits so no binary floating point is involved.
inline std::optional<std::int64_t> decimal_seconds_to_ms(std::string_view s) {
  s = text::trim(s);
  if (s.empty()) return std::nullopt;
  const auto dot = s.find('.');
  const auto whole = s.substr(0, dot);
  const auto frac = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
  if (whole.empty() && frac.empty()) return std::nullopt;
  const auto all_digits = [](std::string_view d) {
    return std::all_of(d.begin(), d.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  if (!all_digits(whole) || !all_digits(frac) || whole.size() > 12) return std::nullopt;
  std::int64_t seconds = 0;
  for (char c : whole) seconds = seconds * 10 + (c - '0');
  std::int64_t millis = 0;
  for (std::size_t k = 0; k < 3; ++k) millis = millis * 10 + (k < frac.size() ? frac[k] - '0' : 0);
  if (frac.size() > 3 && frac[3] >= '5') ++millis;
  return seconds * 1000 + millis;
}

template <typename Int>
std::optional<Int> parse_integer(std::string_view s) {
  s = text::trim(s);
  Int value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return value;
}

inline std::vector<std::string_view> split_commas(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.push_back(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace detail

/// Parses a Bilibili-style comment export:
/// `<d p="time,mode,size,color,epoch,pool,userhash,id">text</d>`.
///
/// Output is sorted by video time (ties on post time, then user hash, then
/// document order). Comments whose text is blank are dropped.
inline std::vector<DanmuComment> parse_danmu_xml(std::string_view raw) {
  namespace pt = boost::property_tree;
  pt::ptree doc;
  try {
    std::istringstream in{std::string(raw)};
    pt::read_xml(in, doc);
  } catch (const pt::xml_parser_error& e) {
    throw Error(ErrorCode::XmlSyntaxError, e.message() + " at line " + std::to_string(e.line()));
  }

  std::vector<DanmuComment> comments;
  std::size_t element_index = 0;
  // <d> elements are accepted at any depth; real exports nest them in <i>.
  const auto visit = [&](const auto& self, const pt::ptree& node) -> void {
    for (const auto& [name, child] : node) {
      if (name == "<xmlattr>" || name == "<xmlcomment>") continue;
      if (name != "d") {
        self(self, child);
        continue;
      }
      const auto this_index = element_index++;
      const auto p = child.template get<std::string>("<xmlattr>.p", "");
      const auto fields = detail::split_commas(p);
      if (fields.size() < 8) {
        throw Error(ErrorCode::AttributeArity,
                    "<d> element " + std::to_string(this_index) + " has " +
                        std::to_string(fields.size()) + " p-fields, expected at least 8");
      }
      const auto where = " in <d> element " + std::to_string(this_index);
      DanmuComment c;
      const auto time = detail::decimal_seconds_to_ms(fields[0]);
      if (!time) throw Error(ErrorCode::NumericField, "unparsable time '" + std::string(fields[0]) + "'" + where);
      c.video_time_ms = *time;
      const auto mode = detail::parse_integer<int>(fields[1]);
      if (!mode) throw Error(ErrorCode::NumericField, "unparsable mode" + where);
      c.mode = *mode;
      const auto color = detail::parse_integer<std::uint32_t>(fields[3]);
      if (!color || *color > 0xFFFFFF) {
        throw Error(ErrorCode::NumericField, "unparsable color '" + std::string(fields[3]) + "'" + where);
      }
      c.color = *color;
      const auto epoch = detail::parse_integer<std::int64_t>(fields[4]);
      if (!epoch) throw Error(ErrorCode::NumericField, "unparsable post time" + where);
      c.post_epoch_s = *epoch;
      c.user_hash = std::string(text::trim(fields[6]));
      c.text = child.template get_value<std::string>();
      if (text::is_blank(c.text)) continue;
      c.text = std::string(text::trim(c.text));
      comments.push_back(std::move(c));
    }
  };
  visit(visit, doc);

  std::stable_sort(comments.begin(), comments.end(), comment_before);
  return comments;
}

/// Inverse of parse_danmu_xml for the fields this pipeline keeps. Font size,
/// pool and row id are written as fixed placeholders.
inline std::string serialize_danmu_xml(const std::vector<DanmuComment>& comments) {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<i>\n";
  std::size_t row = 0;
  for (const auto& c : comments) {
    const auto seconds = c.video_time_ms / 1000;
    const auto millis = c.video_time_ms % 1000;
    std::string time = std::to_string(seconds) + ".";
    if (millis < 100) time += '0';
    if (millis < 10) time += '0';
    time += std::to_string(millis);
    out += "  <d p=\"" + time + "," + std::to_string(c.mode) + ",25," + std::to_string(c.color) + "," +
           std::to_string(c.post_epoch_s) + ",0," + text::escape_xml(c.user_hash) + "," +
           std::to_string(row++) + "\">" + text::escape_xml(c.text) + "</d>\n";
  }
  out += "</i>\n";
  return out;
}

}  // namespace commentcast::ingest
