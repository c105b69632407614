// Test-only reference implementations. These stay deliberately naive and
// independent of the library code paths they check.
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "trace/align.hpp"

namespace trace::oracle {

// Longest common substring by exhaustive scan over all start pairs: O(n*m*k).
// Ties resolve to the earliest source start, then the earliest note start.
inline MatchBlock longest_common_substring(std::u32string_view a, std::u32string_view b,
                                           std::size_t alo, std::size_t ahi, std::size_t blo,
                                           std::size_t bhi) {
  MatchBlock best{alo, blo, 0};
  for (std::size_t i = alo; i < ahi; ++i) {
    for (std::size_t j = blo; j < bhi; ++j) {
      std::size_t k = 0;
      while (i + k < ahi && j + k < bhi && a[i + k] == b[j + k]) ++k;
      if (k > best.length) best = {i, j, k};
    }
  }
  return best;
}

inline void recursive_lcs_blocks(std::u32string_view a, std::u32string_view b, std::size_t alo,
                                 std::size_t ahi, std::size_t blo, std::size_t bhi,
                                 std::vector<MatchBlock>& out) {
  if (alo >= ahi || blo >= bhi) return;
  const MatchBlock m = longest_common_substring(a, b, alo, ahi, blo, bhi);
  if (m.length == 0) return;
  recursive_lcs_blocks(a, b, alo, m.source_start, blo, m.note_start, out);
  out.push_back(m);
  recursive_lcs_blocks(a, b, m.source_start + m.length, ahi, m.note_start + m.length, bhi, out);
}

// Brute-force recursive gestalt alignment.
inline std::vector<MatchBlock> align(std::u32string_view a, std::u32string_view b) {
  std::vector<MatchBlock> out;
  recursive_lcs_blocks(a, b, 0, a.size(), 0, b.size(), out);
  return out;
}

// Per-character evaluation oracle: expands spans to boolean masks.
struct CharCounts {
  std::size_t predicted = 0;
  std::size_t predicted_templated = 0;  // predicted chars on gold templated text
  std::size_t eligible = 0;             // gold templated chars in spans >= min length
  std::size_t eligible_covered = 0;
};

struct OracleSpan {
  std::size_t start = 0;
  std::size_t end = 0;
};

inline CharCounts char_counts(std::size_t note_len, const std::vector<OracleSpan>& predicted,
                              const std::vector<OracleSpan>& gold_templated,
                              std::size_t min_gold_span) {
  std::vector<char> pred_mask(note_len, 0);
  std::vector<char> gold_mask(note_len, 0);
  std::vector<char> eligible_mask(note_len, 0);
  for (const auto& s : predicted)
    for (std::size_t i = s.start; i < s.end; ++i) pred_mask[i] = 1;
  for (const auto& s : gold_templated) {
    for (std::size_t i = s.start; i < s.end; ++i) {
      gold_mask[i] = 1;
      if (s.end - s.start >= min_gold_span) eligible_mask[i] = 1;
    }
  }
  CharCounts c;
  for (std::size_t i = 0; i < note_len; ++i) {
    if (pred_mask[i]) {
      ++c.predicted;
      if (gold_mask[i]) ++c.predicted_templated;
    }
    if (eligible_mask[i]) {
      ++c.eligible;
      if (pred_mask[i]) ++c.eligible_covered;
    }
  }
  return c;
}

}  // namespace trace::oracle
