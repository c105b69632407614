#include "trace/frequency.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>

#include <json.hpp>

#include "trace/util.hpp"

namespace trace {

namespace {

using nlohmann::json;

constexpr const char* kIndexHeader = "trace-chunk-index/v1";

void append_runs(std::u32string_view text, char32_t delimiter, ChunkKind kind,
                 std::vector<Chunk>& out) {
  std::size_t run_start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    const bool at_delim = i < text.size() && text[i] == delimiter;
    const bool at_end = i == text.size();
    if (at_delim || at_end) {
      if (i > run_start) {
        Chunk c;
        c.start = run_start;
        c.end = i;
        c.kind = kind;
        c.key = normalize(text.substr(run_start, i - run_start));
        out.push_back(std::move(c));
      }
      run_start = i + 1;
    }
  }
}

}  // namespace

std::size_t Chunk::nonspace_chars() const {
  // Normalized keys contain whitespace only as single ASCII spaces.
  std::size_t scalars = 0;
  std::size_t spaces = 0;
  for (char c : key) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++scalars;
    if (c == ' ') ++spaces;
  }
  return scalars - spaces;
}

std::vector<Chunk> chunk_note(std::u32string_view text) {
  std::vector<Chunk> chunks;
  append_runs(text, U'.', ChunkKind::sentence, chunks);
  append_runs(text, U'\n', ChunkKind::paragraph, chunks);

  // Collapse chunks that the two chunkings carved out identically, so a
  // single occurrence is not counted twice.
  std::sort(chunks.begin(), chunks.end(), [](const Chunk& a, const Chunk& b) {
    if (a.start != b.start) return a.start < b.start;
    if (a.end != b.end) return a.end < b.end;
    return a.kind < b.kind;
  });
  chunks.erase(std::unique(chunks.begin(), chunks.end(),
                           [](const Chunk& a, const Chunk& b) {
                             return a.start == b.start && a.end == b.end;
                           }),
               chunks.end());
  return chunks;
}

std::string normalize(std::u32string_view raw) {
  std::u32string collapsed;
  collapsed.reserve(raw.size());
  bool pending_space = false;
  for (char32_t cp : raw) {
    if (is_space(cp)) {
      pending_space = !collapsed.empty();  // trims leading whitespace
      continue;
    }
    if (pending_space) {
      collapsed.push_back(U' ');
      pending_space = false;
    }
    collapsed.push_back(to_lower(cp));
  }
  return u32_to_utf8(collapsed);
}

std::string normalize_utf8(std::string_view raw) { return normalize(utf8_to_u32(raw)); }

std::vector<Chunk> filter_min_nonspace(std::vector<Chunk> chunks, std::size_t min_nonspace) {
  std::erase_if(chunks,
                [min_nonspace](const Chunk& c) { return c.nonspace_chars() < min_nonspace; });
  return chunks;
}

std::uint32_t ChunkIndex::intern_patient(const std::string& patient_id) {
  const auto it = patient_ordinals_.find(patient_id);
  if (it != patient_ordinals_.end()) return it->second;
  const auto ordinal = static_cast<std::uint32_t>(patients_.size());
  patients_.push_back(patient_id);
  patient_ordinals_.emplace(patient_id, ordinal);
  return ordinal;
}

std::uint32_t ChunkIndex::patient_ordinal(const std::string& patient_id) const {
  const auto it = patient_ordinals_.find(patient_id);
  return it != patient_ordinals_.end() ? it->second : npos;
}

void ChunkIndex::add(const std::string& key, std::uint32_t patient_ordinal,
                     std::uint32_t count) {
  Entry& e = entries_[key];
  e.total += count;
  auto& pp = e.per_patient;
  auto it = std::lower_bound(pp.begin(), pp.end(), patient_ordinal,
                             [](const auto& pair, std::uint32_t p) { return pair.first < p; });
  if (it != pp.end() && it->first == patient_ordinal) {
    it->second += count;
  } else {
    pp.insert(it, {patient_ordinal, count});
  }
}

std::size_t ChunkIndex::distinct_patients(const std::string& key) const {
  const auto it = entries_.find(key);
  return it != entries_.end() ? it->second.per_patient.size() : 0;
}

std::uint64_t ChunkIndex::count_for(const std::string& key, std::uint32_t patient_ordinal) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return 0;
  const auto& pp = it->second.per_patient;
  const auto pit = std::lower_bound(pp.begin(), pp.end(), patient_ordinal,
                                    [](const auto& pair, std::uint32_t p) { return pair.first < p; });
  return (pit != pp.end() && pit->first == patient_ordinal) ? pit->second : 0;
}

std::uint64_t ChunkIndex::total(const std::string& key) const {
  const auto it = entries_.find(key);
  return it != entries_.end() ? it->second.total : 0;
}

void ChunkIndex::merge(const ChunkIndex& other) {
  // Ordinal spaces differ between shards; remap through patient ids.
  std::vector<std::uint32_t> remap(other.patients_.size());
  for (std::size_t i = 0; i < other.patients_.size(); ++i)
    remap[i] = intern_patient(other.patients_[i]);
  for (const auto& [key, entry] : other.entries_)
    for (const auto& [ordinal, count] : entry.per_patient) add(key, remap[ordinal], count);
}

void ChunkIndex::save(std::ostream& out) const {
  out << kIndexHeader << '\n';
  std::vector<const std::string*> keys;
  keys.reserve(entries_.size());
  for (const auto& [key, entry] : entries_) keys.push_back(&key);
  std::sort(keys.begin(), keys.end(),
            [](const std::string* a, const std::string* b) { return *a < *b; });
  for (const auto* key : keys) {
    const Entry& e = entries_.at(*key);
    std::vector<std::pair<std::string, std::uint32_t>> rows;
    rows.reserve(e.per_patient.size());
    for (const auto& [ordinal, count] : e.per_patient)
      rows.emplace_back(patients_[ordinal], count);
    std::sort(rows.begin(), rows.end());
    for (const auto& [patient, count] : rows) {
      json j;
      j["key"] = *key;
      j["patient_id"] = patient;
      j["count"] = count;
      out << j.dump() << '\n';
    }
  }
}

ChunkIndex ChunkIndex::load(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kIndexHeader)
    throw DataError("chunk index file missing \"" + std::string(kIndexHeader) + "\" header");
  ChunkIndex index;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError("chunk index line " + std::to_string(line_no) + ": " + e.what());
    }
    const auto key = j.at("key").get<std::string>();
    const auto patient = j.at("patient_id").get<std::string>();
    const auto count = j.at("count").get<std::uint32_t>();
    index.add(key, index.intern_patient(patient), count);
  }
  return index;
}

ChunkIndex build_index(const std::vector<NoteChunks>& notes, unsigned workers) {
  if (workers == 0) workers = 1;
  const std::size_t shard_count = std::min<std::size_t>(workers, std::max<std::size_t>(notes.size(), 1));

  std::vector<ChunkIndex> shards(shard_count);
  parallel_for(shard_count, static_cast<unsigned>(shard_count), [&](std::size_t shard) {
    ChunkIndex& index = shards[shard];
    for (std::size_t i = shard; i < notes.size(); i += shard_count) {
      const NoteChunks& nc = notes[i];
      const auto ordinal = index.intern_patient(nc.patient_id);
      for (const auto& chunk : nc.chunks) index.add(chunk.key, ordinal);
    }
  });

  ChunkIndex merged = std::move(shards.front());
  for (std::size_t i = 1; i < shards.size(); ++i) merged.merge(shards[i]);
  return merged;
}

std::vector<FrequencySpan> label_chunks(const ChunkIndex& index, const NoteChunks& note,
                                        const FrequencyConfig& config) {
  std::vector<FrequencySpan> spans;
  const auto ordinal = index.patient_ordinal(note.patient_id);
  for (const auto& chunk : note.chunks) {
    const bool templated = index.distinct_patients(chunk.key) > config.patient_threshold;
    const bool copied =
        ordinal != ChunkIndex::npos && index.count_for(chunk.key, ordinal) > config.per_patient_threshold;
    if (!templated && !copied) continue;
    FrequencySpan s;
    s.note_id = note.note_id;
    s.start = chunk.start;
    s.end = chunk.end;
    s.templated = templated;
    s.copied = copied;
    s.key = chunk.key;
    spans.push_back(std::move(s));
  }
  return spans;
}

}  // namespace trace
