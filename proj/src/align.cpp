#include "trace/align.hpp"

#include <algorithm>
#include <unordered_map>

#include "trace/util.hpp"

namespace trace {

namespace {

// Shared state for one align() call. Note positions per character are built
// once; recursion restricts ranges into them. The run-length rows are
// reused across find calls, resetting only the entries they touched.
struct AlignWorkspace {
  std::u32string_view source;
  std::u32string_view note;
  std::unordered_map<char32_t, std::vector<std::uint32_t>> note_positions;
  std::vector<std::uint32_t> run_len;       // run ending at note pos j, previous source row
  std::vector<std::uint32_t> next_run_len;  // current source row
  std::vector<std::uint32_t> touched;
  std::vector<std::uint32_t> next_touched;

  explicit AlignWorkspace(std::u32string_view src, std::u32string_view nt)
      : source(src), note(nt) {
    note_positions.reserve(note.size());
    for (std::uint32_t j = 0; j < note.size(); ++j) note_positions[note[j]].push_back(j);
    run_len.assign(note.size(), 0);
    next_run_len.assign(note.size(), 0);
  }

  void reset_row(std::vector<std::uint32_t>& row, std::vector<std::uint32_t>& touch_list) {
    for (auto j : touch_list) row[j] = 0;
    touch_list.clear();
  }

  // Longest common substring of source[alo,ahi) and note[blo,bhi).
  // Among equal-length candidates the earliest source start wins, then the
  // earliest note start. Returns length 0 when there is no common character.
  MatchBlock find_longest_match(std::size_t alo, std::size_t ahi, std::size_t blo,
                                std::size_t bhi) {
    MatchBlock best{alo, blo, 0};
    reset_row(run_len, touched);
    for (std::size_t i = alo; i < ahi; ++i) {
      reset_row(next_run_len, next_touched);
      const auto it = note_positions.find(source[i]);
      if (it != note_positions.end()) {
        const auto& positions = it->second;
        // Positions are ascending; clamp to [blo, bhi).
        auto p = std::lower_bound(positions.begin(), positions.end(),
                                  static_cast<std::uint32_t>(blo));
        for (; p != positions.end() && *p < bhi; ++p) {
          const std::uint32_t j = *p;
          const std::uint32_t k = (j > blo ? run_len[j - 1] : 0) + 1;
          next_run_len[j] = k;
          next_touched.push_back(j);
          if (k > best.length) best = {i + 1 - k, j + 1 - k, k};
        }
      }
      run_len.swap(next_run_len);
      touched.swap(next_touched);
    }
    return best;
  }
};

}  // namespace

std::vector<MatchBlock> align(std::u32string_view source, std::u32string_view note) {
  std::vector<MatchBlock> blocks;
  if (source.empty() || note.empty()) return blocks;

  AlignWorkspace ws(source, note);

  // Explicit work stack instead of recursion: block chains can be as long
  // as the shorter input, which would overflow the call stack.
  struct Region {
    std::size_t alo, ahi, blo, bhi;
  };
  std::vector<Region> work{{0, source.size(), 0, note.size()}};
  while (!work.empty()) {
    const Region r = work.back();
    work.pop_back();
    if (r.alo >= r.ahi || r.blo >= r.bhi) continue;
    const MatchBlock m = ws.find_longest_match(r.alo, r.ahi, r.blo, r.bhi);
    if (m.length == 0) continue;
    blocks.push_back(m);
    work.push_back({r.alo, m.source_start, r.blo, m.note_start});
    work.push_back({m.source_start + m.length, r.ahi, m.note_start + m.length, r.bhi});
  }

  std::sort(blocks.begin(), blocks.end(), [](const MatchBlock& a, const MatchBlock& b) {
    return a.source_start < b.source_start;
  });
  return blocks;
}

std::vector<MatchBlock> align_utf8(std::string_view source, std::string_view note) {
  const std::u32string s = utf8_to_u32(source);
  const std::u32string n = utf8_to_u32(note);
  return align(s, n);
}

}  // namespace trace
