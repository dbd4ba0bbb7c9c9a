#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace commentcast::text {

// Word counting for durations and chunk sizes. CJK scripts have no spaces, so
// in CjkChars mode every CJK ideograph/kana counts as one word and the
// remaining text is split on whitespace.
enum class WordCountMode { CjkChars, Whitespace };

inline std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(ws);
  return s.substr(first, last - first + 1);
}

inline bool is_blank(std::string_view s) { return trim(s).empty(); }

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

// Decodes one UTF-8 code point starting at `pos`, advancing it. Invalid bytes
// decode as U+FFFD and consume a single byte.
inline char32_t next_code_point(std::string_view s, std::size_t& pos) {
  const auto byte = [&](std::size_t i) { return static_cast<unsigned char>(s[i]); };
  const unsigned char lead = byte(pos);
  int extra = 0;
  char32_t cp = 0;
  if (lead < 0x80) {
    ++pos;
    return lead;
  } else if ((lead & 0xE0) == 0xC0) {
    extra = 1;
    cp = lead & 0x1F;
  } else if ((lead & 0xF0) == 0xE0) {
    extra = 2;
    cp = lead & 0x0F;
  } else if ((lead & 0xF8) == 0xF0) {
    extra = 3;
    cp = lead & 0x07;
  } else {
    ++pos;
    return 0xFFFD;
  }
  if (pos + extra >= s.size()) {
    ++pos;
    return 0xFFFD;
  }
  for (int k = 1; k <= extra; ++k) {
    const unsigned char c = byte(pos + k);
    if ((c & 0xC0) != 0x80) {
      ++pos;
      return 0xFFFD;
    }
    cp = (cp << 6) | (c & 0x3F);
  }
  pos += extra + 1;
  return cp;
}

inline std::vector<char32_t> code_points(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  for (std::size_t pos = 0; pos < s.size();) out.push_back(next_code_point(s, pos));
  return out;
}

inline void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

// Ideographs and kana; CJK punctuation blocks are deliberately excluded.
constexpr bool is_cjk(char32_t cp) {
  return (cp >= 0x4E00 && cp <= 0x9FFF) || (cp >= 0x3400 && cp <= 0x4DBF) ||
         (cp >= 0x3040 && cp <= 0x30FF) || (cp >= 0xF900 && cp <= 0xFAFF) ||
         (cp >= 0x20000 && cp <= 0x2A6DF);
}

constexpr bool is_space(char32_t cp) {
  return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' || cp == '\v' ||
         cp == 0x3000 || cp == 0xA0;
}

constexpr bool is_word_char(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || (cp >= '0' && cp <= '9');
  }
  // Non-ASCII letters outside CJK (accented Latin, Cyrillic, ...) are treated
  // as word characters; general punctuation and fullwidth forms are not.
  if (is_cjk(cp) || is_space(cp)) return false;
  if (cp >= 0x2000 && cp <= 0x206F) return false;
  if (cp >= 0x3000 && cp <= 0x303F) return false;
  if (cp >= 0xFF00 && cp <= 0xFF0F) return false;
  if (cp >= 0xFF1A && cp <= 0xFF20) return false;
  if (cp == 0xFFFD) return false;
  return true;
}

inline std::size_t word_count(std::string_view s, WordCountMode mode = WordCountMode::CjkChars) {
  std::size_t count = 0;
  bool in_run = false;
  for (std::size_t pos = 0; pos < s.size();) {
    const char32_t cp = next_code_point(s, pos);
    if (is_space(cp)) {
      in_run = false;
    } else if (mode == WordCountMode::CjkChars && is_cjk(cp)) {
      ++count;
      in_run = false;
    } else if (!in_run) {
      ++count;
      in_run = true;
    }
  }
  return count;
}

// Lowercased word tokens. Apostrophes inside ASCII words are kept ("i'm"),
// each CJK character is its own token, everything else separates.
inline std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> tokens;
  std::string current;
  const auto flush = [&] {
    while (!current.empty() && current.back() == '\'') current.pop_back();
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t pos = 0; pos < s.size();) {
    const char32_t cp = next_code_point(s, pos);
    if (is_cjk(cp)) {
      flush();
      std::string t;
      append_utf8(t, cp);
      tokens.push_back(std::move(t));
    } else if (is_word_char(cp)) {
      if (cp >= 'A' && cp <= 'Z') {
        current += static_cast<char>(cp - 'A' + 'a');
      } else {
        append_utf8(current, cp);
      }
    } else if ((cp == '\'' || cp == 0x2019) && !current.empty()) {
      current += '\'';
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

inline bool is_stopword(std::string_view token) {
  static constexpr std::array<std::string_view, 96> kStop = {
      "a",     "about", "after", "again", "all",   "also",  "am",    "an",    "and",   "any",
      "are",   "as",    "at",    "be",    "been",  "but",   "by",    "can",   "could", "did",
      "do",    "does",  "even",  "every", "for",   "from",  "get",   "got",   "had",   "has",
      "have",  "he",    "her",   "here",  "him",   "his",   "how",   "i",     "i'm",   "if",
      "in",    "into",  "is",    "it",    "it's",  "its",   "just",  "let's", "like",  "me",
      "more",  "my",    "no",    "not",   "now",   "of",    "on",    "one",   "or",    "our",
      "out",   "same",  "saying", "she",  "so",    "some",  "than",  "that",  "that's", "the",
      "their", "them",  "then",  "there", "these", "they",  "this",  "time",  "to",    "too",
      "up",    "us",    "very",  "was",   "we",    "were",  "what",  "when",  "which", "who",
      "why",   "will",  "with",  "would", "you",   "your"};
  return std::find(kStop.begin(), kStop.end(), token) != kStop.end();
}

// Tokens minus stopwords; falls back to all tokens when nothing remains.
inline std::vector<std::string> content_tokens(std::string_view s) {
  auto all = tokenize(s);
  std::vector<std::string> content;
  for (const auto& t : all) {
    if (!is_stopword(t)) content.push_back(t);
  }
  return content.empty() ? all : content;
}

// Case- and whitespace-insensitive key used for exact-duplicate detection.
inline std::string normalize_for_dedup(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : trim(s)) {
    const bool space = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    if (space) {
      pending_space = true;
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
  }
  return out;
}

// Decodes the five predefined XML entities plus decimal/hex character
// references. Unknown entities are left untouched.
inline std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out += s[i];
      continue;
    }
    const auto semi = s.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 12) {
      out += s[i];
      continue;
    }
    const auto name = s.substr(i + 1, semi - i - 1);
    std::optional<char32_t> cp;
    if (name == "amp") cp = '&';
    else if (name == "lt") cp = '<';
    else if (name == "gt") cp = '>';
    else if (name == "quot") cp = '"';
    else if (name == "apos") cp = '\'';
    else if (name.size() > 1 && name[0] == '#') {
      std::uint32_t value = 0;
      const bool hex = name[1] == 'x' || name[1] == 'X';
      const auto digits = name.substr(hex ? 2 : 1);
      const auto [ptr, ec] =
          std::from_chars(digits.data(), digits.data() + digits.size(), value, hex ? 16 : 10);
      if (ec == std::errc{} && ptr == digits.data() + digits.size() && !digits.empty() &&
          value <= 0x10FFFF) {
        cp = value;
      }
    }
    if (!cp) {
      out += s[i];
      continue;
    }
    append_utf8(out, *cp);
    i = semi;
  }
  return out;
}

inline std::string escape_xml(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

// Keeps the first `max_words` words, counted the same way as word_count.
inline std::string truncate_words(std::string_view s, std::size_t max_words,
                                  WordCountMode mode = WordCountMode::CjkChars) {
  std::size_t count = 0;
  bool in_run = false;
  std::size_t cut = s.size();
  for (std::size_t pos = 0; pos < s.size();) {
    const std::size_t here = pos;
    const char32_t cp = next_code_point(s, pos);
    bool starts_word = false;
    if (is_space(cp)) {
      in_run = false;
    } else if (mode == WordCountMode::CjkChars && is_cjk(cp)) {
      starts_word = true;
      in_run = false;
    } else if (!in_run) {
      starts_word = true;
      in_run = true;
    }
    if (starts_word) {
      if (count == max_words) {
        cut = here;
        break;
      }
      ++count;
    }
  }
  return std::string(trim(s.substr(0, cut)));
}

}  // namespace commentcast::text
