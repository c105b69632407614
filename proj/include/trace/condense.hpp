#pragma once

#include <span>
#include <string>
#include <vector>

#include "trace/corpus.hpp"

namespace trace {

enum class ResolvedLabel { templated, copied, both };
enum class SpanAction {
  remove,                        // templated text, deleted everywhere
  keep_first_instance_kept,      // earliest copy in the patient, retained
  keep_first_instance_removed,   // later copy, deleted
};

const char* to_string(ResolvedLabel label);
const char* to_string(SpanAction action);

// A flagged range heading into overlap resolution, module-agnostic.
// copy_group_keys identify copied content for first-instance grouping:
// reference spans use the matched source range, frequency spans the
// normalized chunk key. The two never share a key.
struct PooledSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  bool templated = false;
  bool copied = false;
  bool from_reference = false;
  bool from_frequency = false;
  std::vector<std::string> source_ids;
  std::vector<std::string> copy_group_keys;
};

// Non-overlapping union of pooled spans with accumulated provenance.
struct ResolvedSpan {
  std::string note_id;
  std::size_t start = 0;
  std::size_t end = 0;
  ResolvedLabel label = ResolvedLabel::templated;
  bool from_reference = false;
  bool from_frequency = false;
  std::vector<std::string> source_ids;       // sorted, deduplicated
  std::vector<std::string> copy_group_keys;  // sorted, deduplicated
  SpanAction action = SpanAction::remove;

  std::size_t length() const { return end - start; }
  bool removes_text() const { return action != SpanAction::keep_first_instance_kept; }
};

// Unions overlapping or adjacent flagged ranges; labels, modules and
// source ids accumulate. Actions are provisional here: templated wins over
// copied, and copied-only spans start as kept until the dedup policy runs.
std::vector<ResolvedSpan> resolve_overlaps(const std::string& note_id,
                                           std::vector<PooledSpan> spans,
                                           std::size_t note_length);

// Assigns final actions across one patient timeline. Every templated (or
// both-labeled) span is removed. Copied-only spans are grouped by content
// identity; the earliest member under (filed_at, note_id, start) is kept
// and later members are removed. A span that unions several identities is
// kept if it is the first instance of any of them, so no group loses all
// of its members. spans_per_note must align with timeline.notes.
void apply_dedup_policy(const Timeline& timeline,
                        std::span<std::vector<ResolvedSpan>> spans_per_note);

struct AnnotatedNote {
  Note note;
  std::vector<ResolvedSpan> spans;
  std::string condensed_text;
  std::size_t removed_chars = 0;  // scalar count, = |original| - |condensed|
};

inline constexpr std::size_t kRemovedOffset = SIZE_MAX;

struct CondenseResult {
  AnnotatedNote annotated;
  // original scalar index -> condensed scalar index, kRemovedOffset where
  // the character was deleted. Marker characters (when configured) occupy
  // condensed positions that no original index maps to.
  std::vector<std::size_t> original_to_condensed;
};

// Deletes the ranges of spans whose action removes text, optionally
// inserting `marker` at each removal site. Removal ranges must be
// non-overlapping — resolve_overlaps guarantees that; anything else is a
// logic error.
CondenseResult condense_note(const Note& note, std::u32string_view note_text,
                             std::vector<ResolvedSpan> spans, const std::string& marker = {});

}  // namespace trace
