#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "trace/condense.hpp"
#include "trace/corpus.hpp"
#include "trace/frequency.hpp"
#include "trace/reference.hpp"

namespace trace {

struct PipelineConfig {
  bool run_reference = true;
  bool run_frequency = true;
  ReferenceConfig reference;
  FrequencyConfig frequency;
  std::string condense_marker;  // inserted at removal sites; empty = none
  unsigned workers = 1;         // 0 = hardware concurrency
};

struct PipelineResult {
  std::vector<AnnotatedNote> notes;  // corpus order
  std::vector<std::string> warnings;
};

// Full TRACE pass over a corpus:
//   1. Reference Module per note (alignment against attributed sources).
//   2. Reference-only resolution and first-instance dedup per timeline,
//      producing an intermediate condensed text per note.
//   3. Frequency Module over the intermediate texts: chunk, count
//      corpus-wide, label by thresholds. Chunk ranges are mapped back to
//      original-note coordinates, splitting at removal seams.
//   4. Final overlap resolution over both modules' spans, dedup policy,
//      and condensation against the original text.
// Output is deterministic for any worker count.
PipelineResult run_pipeline(const Corpus& corpus, const PipelineConfig& config);

// Condensed notes: the input schema with `text` replaced and
// `removed_chars` added.
void write_condensed_jsonl(const PipelineResult& result, std::ostream& out);

// Annotation sidecar, one line per note (flagged or not):
//   {"note_id", "spans":[{"start","end","label","modules","source_ids","action"}]}
void write_sidecar_jsonl(const PipelineResult& result, std::ostream& out);

struct SidecarNote {
  std::string note_id;
  std::vector<ResolvedSpan> spans;
};

std::vector<SidecarNote> read_sidecar_jsonl(std::istream& in);
std::vector<SidecarNote> read_sidecar_file(const std::string& path);

ResolvedLabel label_from_string(const std::string& s);
SpanAction action_from_string(const std::string& s);

}  // namespace trace
