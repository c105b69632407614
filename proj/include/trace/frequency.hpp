#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

namespace trace {

enum class ChunkKind { sentence, paragraph };

// One sentence (period-delimited) or paragraph (newline-delimited) segment.
// start/end index the text the chunking ran over; key is the normalized
// form used for frequency counting.
struct Chunk {
  std::size_t start = 0;
  std::size_t end = 0;
  ChunkKind kind = ChunkKind::sentence;
  std::string key;

  std::size_t nonspace_chars() const;
};

// Emits both chunkings over the same text: sentence chunks are the maximal
// runs between '.' characters, paragraph chunks the maximal runs between
// '\n'. Delimiters belong to no chunk; empty runs are not emitted. A
// single-sentence paragraph with no trailing period produces the same
// (start, end) from both chunkings — such duplicates collapse to one chunk
// so one occurrence in the text is counted once.
std::vector<Chunk> chunk_note(std::u32string_view text);

// Lowercases (1:1 Unicode mapping), collapses every whitespace run to a
// single space, and trims. Idempotent.
std::string normalize(std::u32string_view raw);
std::string normalize_utf8(std::string_view raw);

std::vector<Chunk> filter_min_nonspace(std::vector<Chunk> chunks, std::size_t min_nonspace);

struct FrequencyConfig {
  std::size_t patient_threshold = 5;      // templated iff distinct patients > this
  std::size_t per_patient_threshold = 1;  // copied iff occurrences in one patient > this
  std::size_t min_nonspace_chars = 50;
};

// Corpus-wide occurrence statistics per normalized chunk key. Patients are
// interned to ordinals; per-key stats hold (patient ordinal, count) pairs
// sorted by ordinal. Merge is associative and commutative, so shards built
// over disjoint note sets combine in any order.
class ChunkIndex {
 public:
  std::uint32_t intern_patient(const std::string& patient_id);
  // Returns the ordinal for a known patient, or npos if never interned.
  std::uint32_t patient_ordinal(const std::string& patient_id) const;
  static constexpr std::uint32_t npos = UINT32_MAX;

  void add(const std::string& key, std::uint32_t patient_ordinal, std::uint32_t count = 1);

  std::size_t distinct_patients(const std::string& key) const;
  std::uint64_t count_for(const std::string& key, std::uint32_t patient_ordinal) const;
  std::uint64_t total(const std::string& key) const;
  std::size_t key_count() const { return entries_.size(); }

  // Folds `other` into this index. The patient ordinal spaces may differ;
  // ordinals are re-interned by patient_id.
  void merge(const ChunkIndex& other);

  // Versioned JSONL dump: header line "trace-chunk-index/v1", then one
  // {"key","patient_id","count"} record per pair, sorted by (key, patient).
  void save(std::ostream& out) const;
  static ChunkIndex load(std::istream& in);

 private:
  struct Entry {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> per_patient;  // sorted by ordinal
    std::uint64_t total = 0;
  };
  std::unordered_map<std::string, Entry> entries_;
  std::vector<std::string> patients_;
  std::unordered_map<std::string, std::uint32_t> patient_ordinals_;

  friend struct ChunkIndexTestPeer;
};

// Chunks already filtered and keyed, tagged with their note identity.
struct NoteChunks {
  std::string note_id;
  std::string patient_id;
  std::vector<Chunk> chunks;
};

// Counts every retained chunk key per patient. Deterministic regardless of
// traversal order; shards merged associatively when workers > 1.
ChunkIndex build_index(const std::vector<NoteChunks>& notes, unsigned workers = 1);

// A chunk whose key crossed a threshold. A chunk can be both templated
// (key in more than patient_threshold patients) and copied (key more than
// per_patient_threshold times in this chunk's patient); precedence between
// the two is the condenser's call.
struct FrequencySpan {
  std::string note_id;
  std::size_t start = 0;
  std::size_t end = 0;
  bool templated = false;
  bool copied = false;
  std::string key;
};

std::vector<FrequencySpan> label_chunks(const ChunkIndex& index, const NoteChunks& note,
                                        const FrequencyConfig& config = {});

}  // namespace trace
