#include "trace/align.hpp"

#include <doctest.h>

#include <random>
#include <string>

#include "oracles.hpp"
#include "trace/util.hpp"

using namespace trace;

namespace {

std::u32string random_text(std::mt19937_64& rng, std::size_t max_len, int alphabet) {
  std::uniform_int_distribution<std::size_t> len_dist(0, max_len);
  std::uniform_int_distribution<int> char_dist(0, alphabet - 1);
  std::u32string s(len_dist(rng), U'a');
  for (auto& c : s) c = static_cast<char32_t>(U'a' + char_dist(rng));
  return s;
}

}  // namespace

TEST_SUITE("align") {

TEST_CASE("identical strings produce one full block") {
  CHECK(align_utf8("ABC", "ABC") == std::vector<MatchBlock>{{0, 0, 3}});
}

TEST_CASE("disjoint alphabets produce nothing") {
  CHECK(align_utf8("abcd", "wxyz").empty());
}

TEST_CASE("insertion in source splits into two blocks") {
  // Frozen from the brute-force recursive-LCS oracle.
  const std::u32string src = U"abxcd";
  const std::u32string note = U"abcd";
  const auto expected = oracle::align(src, note);
  REQUIRE(expected == std::vector<MatchBlock>{{0, 0, 2}, {3, 2, 2}});
  CHECK(align(src, note) == expected);
}

TEST_CASE("empty inputs") {
  CHECK(align(U"", U"abc").empty());
  CHECK(align(U"abc", U"").empty());
  CHECK(align(U"", U"").empty());
}

TEST_CASE("tie between equal-length substrings picks earliest source, then note") {
  // "ab" and "cd" both have length 2; "ab" is earlier in the source.
  const auto blocks = align(U"ab_cd", U"cd-ab");
  REQUIRE(blocks.size() == 1);
  CHECK(blocks[0] == MatchBlock{0, 3, 2});

  // Equal source position, two note candidates: earliest note start wins,
  // and the right flank still matches the later occurrence.
  const auto repeated = align(U"xy", U"xy.xy");
  REQUIRE(repeated.size() == 1);
  CHECK(repeated[0] == MatchBlock{0, 0, 2});
}

TEST_CASE("self alignment covers the whole string") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = random_text(rng, 120, 4);
    if (s.empty()) continue;
    const auto blocks = align(s, s);
    REQUIRE(blocks.size() == 1);
    CHECK(blocks[0] == MatchBlock{0, 0, s.size()});
  }
}

TEST_CASE("blocks are monotone and non-overlapping in both coordinates") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const auto a = random_text(rng, 150, 3);
    const auto b = random_text(rng, 150, 3);
    const auto blocks = align(a, b);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      CHECK(blocks[i].length > 0);
      CHECK(blocks[i].source_start + blocks[i].length <= a.size());
      CHECK(blocks[i].note_start + blocks[i].length <= b.size());
      for (std::size_t k = 0; k < blocks[i].length; ++k)
        CHECK(a[blocks[i].source_start + k] == b[blocks[i].note_start + k]);
      if (i > 0) {
        CHECK(blocks[i].source_start >= blocks[i - 1].source_start + blocks[i - 1].length);
        CHECK(blocks[i].note_start >= blocks[i - 1].note_start + blocks[i - 1].length);
      }
    }
  }
}

TEST_CASE("matches the brute-force recursive-LCS oracle on random pairs") {
  std::mt19937_64 rng(42);
  for (int alphabet : {4, 26}) {
    for (int trial = 0; trial < 600; ++trial) {
      const auto a = random_text(rng, 200, alphabet);
      const auto b = random_text(rng, 200, alphabet);
      const auto got = align(a, b);
      const auto want = oracle::align(a, b);
      REQUIRE_MESSAGE(got == want, "alphabet=" << alphabet << " trial=" << trial);
    }
  }
}

TEST_CASE("multibyte text aligns on scalar positions") {
  // 'é' and '≈' are multi-byte in UTF-8; offsets must count scalars.
  const auto blocks = align_utf8("héllo wörld", "xx héllo wörld yy");
  REQUIRE(blocks.size() == 1);
  CHECK(blocks[0] == MatchBlock{0, 3, 11});
}

}  // TEST_SUITE
