#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "trace/align.hpp"
#include "trace/corpus.hpp"

namespace trace {

enum class SpanLabel { templated, copied };

// A labeled half-open range in note coordinates produced by aligning one
// attributed source against the note. Carries the matched source range so
// copied spans can later be grouped by content identity.
struct CandidateSpan {
  std::string note_id;
  std::size_t start = 0;
  std::size_t end = 0;
  SpanLabel label = SpanLabel::templated;
  std::string source_id;  // template_id or source note_id
  std::size_t source_start = 0;
  std::size_t source_end = 0;

  std::size_t length() const { return end - start; }
};

enum class CopyScope { corpus, patient };

struct ReferenceConfig {
  std::size_t min_span_chars = 50;  // raw chars, whitespace included
  CopyScope copy_scope = CopyScope::corpus;
};

// Lookup from note_id to note, built once per corpus so copy-source
// resolution is O(1) per id.
using NoteIndex = std::unordered_map<std::string, const Note*>;
NoteIndex build_note_index(const Corpus& corpus);

// Aligns one source against the note and emits a CandidateSpan per match
// block, labeled by the source kind.
std::vector<CandidateSpan> extract_spans(const Note& note, std::u32string_view note_text,
                                         const TemplateSource& source);
std::vector<CandidateSpan> extract_spans(const Note& note, std::u32string_view note_text,
                                         const Note& copy_source);

// Coalesces spans with identical (label, source_id) whose gap in the note
// consists only of spaces, tabs, CR or LF (adjacent spans count). Output
// sorted by start. Matched source ranges are unioned.
std::vector<CandidateSpan> merge_whitespace_gaps(std::vector<CandidateSpan> spans,
                                                 std::u32string_view note_text);

// Drops spans shorter than min_chars; spans of exactly min_chars survive.
std::vector<CandidateSpan> filter_min_length(std::vector<CandidateSpan> spans,
                                             std::size_t min_chars);

struct ReferenceResult {
  std::vector<CandidateSpan> spans;
  std::vector<std::string> warnings;  // one per unresolvable copy source
};

// Runs alignment once per attributed source, pools the spans, merges
// whitespace gaps per (label, source_id), then filters by length.
// Unresolvable copy_source_ids are skipped with a warning.
ReferenceResult run_reference_module(const Note& note, const NoteIndex& index,
                                     const ReferenceConfig& config = {});

}  // namespace trace
