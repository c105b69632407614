#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace trace {

// One matched block between a source text and a note text. Offsets count
// Unicode scalars. Blocks from a single alignment never overlap and are
// strictly increasing in both coordinates.
struct MatchBlock {
  std::size_t source_start = 0;
  std::size_t note_start = 0;
  std::size_t length = 0;

  bool operator==(const MatchBlock&) const = default;
};

// Gestalt (recursive longest-common-substring) alignment: find the longest
// common substring — ties broken by earliest source position, then earliest
// note position — then recurse on the flanking regions of both strings.
// Pure character-level matching, no junk heuristics.
std::vector<MatchBlock> align(std::u32string_view source, std::u32string_view note);

// UTF-8 convenience wrapper; offsets in the result still count scalars.
std::vector<MatchBlock> align_utf8(std::string_view source, std::string_view note);

}  // namespace trace
