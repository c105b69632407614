#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace trace {

// UTC instant with microsecond resolution, parsed from ISO-8601.
struct Timestamp {
  std::int64_t micros_since_epoch = 0;

  auto operator<=>(const Timestamp&) const = default;
};

// Parses "YYYY-MM-DDTHH:MM:SS[.frac][Z|±HH:MM|±HHMM]". A missing zone
// designator is treated as UTC; `assumed_utc` is set so callers can warn.
Timestamp parse_timestamp(const std::string& iso8601, bool* assumed_utc = nullptr);
std::string format_timestamp(Timestamp ts);

struct TemplateSource {
  std::string template_id;
  std::string text;  // template body, non-empty
};

struct Note {
  std::string note_id;
  std::string patient_id;
  Timestamp filed_at;
  std::string filed_at_raw;  // as ingested, for diagnostics
  std::string note_type;
  std::string text;  // UTF-8; spans elsewhere index its Unicode scalars
  std::vector<TemplateSource> template_sources;
  std::vector<std::string> copy_source_ids;
};

// (filed_at, note_id) — the corpus-wide total order on notes.
bool note_order_less(const Note& a, const Note& b);

struct Timeline {
  std::string patient_id;
  std::vector<Note> notes;  // ascending by (filed_at, note_id)
};

// Immutable after ingest; timelines sorted by patient_id, notes sorted
// within each timeline. Safe to share across threads.
struct Corpus {
  std::vector<Timeline> timelines;

  std::size_t note_count() const;
  // Index of every note by id; built on demand by callers that resolve
  // copy sources (see find_note).
  const Note* find_note(const std::string& note_id) const;
};

using WarningSink = std::function<void(const std::string&)>;

// Reads one JSON note object per line, groups by patient and sorts each
// timeline. Malformed lines, duplicate note_ids, missing fields and bad
// timestamps raise DataError naming the offending line.
Corpus ingest_corpus(const std::string& path, const WarningSink& warn = {});
Corpus ingest_corpus(std::istream& in, const WarningSink& warn = {});

// Sorts notes into a timeline. All notes must share one patient_id.
Timeline order_timeline(std::vector<Note> notes);

// Serializes notes in corpus order (patients ascending, timeline order
// within). Note text round-trips byte-identically through ingest.
void write_corpus_jsonl(const Corpus& corpus, std::ostream& out);
std::string note_to_json_line(const Note& note);

}  // namespace trace
