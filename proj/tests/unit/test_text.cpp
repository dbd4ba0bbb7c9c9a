#include "commentcast/text.hpp"

#include "../support.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace commentcast;
using text::WordCountMode;

namespace {

// Reference counter: whitespace runs via istringstream, CJK handled separately.
std::size_t whitespace_oracle(const std::string& s) {
  std::istringstream in(s);
  std::string w;
  std::size_t n = 0;
  while (in >> w) ++n;
  return n;
}

}  // namespace

TEST(WordCount, WhitespaceRuns) {
  EXPECT_EQ(text::word_count(""), 0u);
  EXPECT_EQ(text::word_count("   "), 0u);
  EXPECT_EQ(text::word_count("Hello, welcome to the video!"), 5u);
  EXPECT_EQ(text::word_count("  a\tb\nc  "), 3u);
}

TEST(WordCount, CjkCharactersCountIndividually) {
  // 你好世界 is four CJK code points.
  EXPECT_EQ(text::word_count("\xE4\xBD\xA0\xE5\xA5\xBD\xE4\xB8\x96\xE7\x95\x8C"), 4u);
  EXPECT_EQ(text::word_count("\xE4\xBD\xA0\xE5\xA5\xBD\xE4\xB8\x96\xE7\x95\x8C", WordCountMode::Whitespace), 1u);
  EXPECT_EQ(text::word_count("ok \xE4\xBD\xA0\xE5\xA5\xBD"), 3u);
}

TEST(WordCount, MatchesStreamOracleOnAscii) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    std::string s;
    const auto len = rng() % 40;
    for (std::size_t k = 0; k < len; ++k) {
      const auto r = rng() % 6;
      s += r == 0 ? ' ' : (r == 1 ? '\t' : static_cast<char>('a' + rng() % 26));
    }
    ASSERT_EQ(text::word_count(s), whitespace_oracle(s)) << '"' << s << '"';
    ASSERT_EQ(text::word_count(s, WordCountMode::Whitespace), whitespace_oracle(s));
  }
}

TEST(TruncateWords, KeepsPrefixWithLimit) {
  EXPECT_EQ(text::truncate_words("one two three four", 2), "one two");
  EXPECT_EQ(text::truncate_words("one two", 5), "one two");
  EXPECT_EQ(text::truncate_words("", 3), "");
}

TEST(TruncateWords, PropertyCountAndPrefix) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 300; ++i) {
    const auto s = testing_support::random_words(rng, rng() % 30);
    const std::size_t limit = rng() % 20;
    const auto cut = text::truncate_words(s, limit);
    ASSERT_EQ(text::word_count(cut), std::min(limit, text::word_count(s)));
    ASSERT_EQ(s.rfind(cut, 0), 0u) << "not a prefix";
  }
}

TEST(Tokenize, LowercasesAndKeepsApostrophes) {
  const auto t = text::tokenize("I'm here, for a SECOND time!");
  const std::vector<std::string> expected = {"i'm", "here", "for", "a", "second", "time"};
  EXPECT_EQ(t, expected);
}

TEST(Tokenize, ContentTokensDropStopwordsButNeverEmpty) {
  EXPECT_EQ(text::content_tokens("the snack is here"), std::vector<std::string>{"snack"});
  EXPECT_EQ(text::content_tokens("the"), std::vector<std::string>{"the"});
}

TEST(Normalize, DedupKeyFoldsCaseAndSpace) {
  EXPECT_EQ(text::normalize_for_dedup("  Nice!  "), text::normalize_for_dedup("nice!"));
  EXPECT_EQ(text::normalize_for_dedup("a   b"), "a b");
  EXPECT_NE(text::normalize_for_dedup("ab"), text::normalize_for_dedup("a b"));
}

TEST(Entities, DecodeAndEscapeRoundTrip) {
  EXPECT_EQ(text::decode_entities("a &amp; b &lt;c&gt; &quot;&apos;"), "a & b <c> \"'");
  EXPECT_EQ(text::decode_entities("&#65;&#x42;"), "AB");
  EXPECT_EQ(text::decode_entities("&unknown; & alone"), "&unknown; & alone");
  const std::string raw = "<tag attr=\"x\">Tom & Jerry's</tag>";
  EXPECT_EQ(text::decode_entities(text::escape_xml(raw)), raw);
}

TEST(Utf8, MalformedBytesDoNotThrow) {
  const std::string bad = "ok \xFF\xFE end";
  EXPECT_NO_THROW(text::word_count(bad));
  EXPECT_NO_THROW(text::tokenize(bad));
}
