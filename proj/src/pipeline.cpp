#include "trace/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "trace/util.hpp"

namespace trace {

namespace {

using nlohmann::json;

std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = kDigits[v & 0xF];
    v >>= 4;
  }
  return out;
}

PooledSpan to_pooled(const CandidateSpan& s) {
  PooledSpan p;
  p.start = s.start;
  p.end = s.end;
  p.templated = s.label == SpanLabel::templated;
  p.copied = s.label == SpanLabel::copied;
  p.from_reference = true;
  p.source_ids = {s.source_id};
  if (p.copied) {
    // Content identity for first-instance grouping: the matched source range.
    p.copy_group_keys = {"ref:" + s.source_id + ":" + std::to_string(s.source_start) + "-" +
                         std::to_string(s.source_end)};
  }
  return p;
}

// Flat view of the corpus: (timeline, note) indices in corpus order.
struct FlatNote {
  std::size_t timeline = 0;
  std::size_t note = 0;
};

}  // namespace

PipelineResult run_pipeline(const Corpus& corpus, const PipelineConfig& config) {
  PipelineResult result;

  std::vector<FlatNote> flat;
  flat.reserve(corpus.note_count());
  for (std::size_t t = 0; t < corpus.timelines.size(); ++t)
    for (std::size_t n = 0; n < corpus.timelines[t].notes.size(); ++n) flat.push_back({t, n});
  const std::size_t note_count = flat.size();

  const auto note_at = [&](std::size_t i) -> const Note& {
    return corpus.timelines[flat[i].timeline].notes[flat[i].note];
  };

  std::vector<std::u32string> texts(note_count);
  parallel_for(note_count, config.workers,
               [&](std::size_t i) { texts[i] = utf8_to_u32(note_at(i).text); });

  // --- Reference Module ---------------------------------------------------
  std::vector<std::vector<PooledSpan>> reference_pooled(note_count);
  std::vector<std::vector<std::string>> warnings_per_note(note_count);
  if (config.run_reference) {
    const NoteIndex index = build_note_index(corpus);
    parallel_for(note_count, config.workers, [&](std::size_t i) {
      ReferenceResult ref = run_reference_module(note_at(i), index, config.reference);
      warnings_per_note[i] = std::move(ref.warnings);
      auto& pooled = reference_pooled[i];
      pooled.reserve(ref.spans.size());
      for (const auto& span : ref.spans) pooled.push_back(to_pooled(span));
    });
    for (auto& w : warnings_per_note)
      result.warnings.insert(result.warnings.end(), std::make_move_iterator(w.begin()),
                             std::make_move_iterator(w.end()));
  }

  // --- Frequency Module over the post-reference intermediate ---------------
  std::vector<std::vector<PooledSpan>> frequency_pooled(note_count);
  if (config.run_frequency) {
    // Reference-only resolution/dedup gives the intermediate text each
    // chunk is counted over, plus the map back to original coordinates.
    std::vector<std::vector<ResolvedSpan>> ref_resolved(note_count);
    parallel_for(note_count, config.workers, [&](std::size_t i) {
      ref_resolved[i] =
          resolve_overlaps(note_at(i).note_id, reference_pooled[i], texts[i].size());
    });
    for (std::size_t t = 0, i = 0; t < corpus.timelines.size(); ++t) {
      const auto& timeline = corpus.timelines[t];
      apply_dedup_policy(timeline, {ref_resolved.data() + i, timeline.notes.size()});
      i += timeline.notes.size();
    }

    std::vector<std::u32string> intermediate(note_count);
    std::vector<std::vector<std::size_t>> to_original(note_count);  // intermediate -> original
    parallel_for(note_count, config.workers, [&](std::size_t i) {
      CondenseResult cr = condense_note(note_at(i), texts[i], std::move(ref_resolved[i]));
      auto& inv = to_original[i];
      inv.reserve(texts[i].size() - cr.annotated.removed_chars);
      for (std::size_t orig = 0; orig < cr.original_to_condensed.size(); ++orig)
        if (cr.original_to_condensed[orig] != kRemovedOffset) inv.push_back(orig);
      intermediate[i] = utf8_to_u32(cr.annotated.condensed_text);
    });

    std::vector<NoteChunks> note_chunks(note_count);
    parallel_for(note_count, config.workers, [&](std::size_t i) {
      const Note& note = note_at(i);
      NoteChunks nc;
      nc.note_id = note.note_id;
      nc.patient_id = note.patient_id;
      nc.chunks = filter_min_nonspace(chunk_note(intermediate[i]),
                                      config.frequency.min_nonspace_chars);
      note_chunks[i] = std::move(nc);
    });

    const ChunkIndex index = build_index(note_chunks, config.workers);

    parallel_for(note_count, config.workers, [&](std::size_t i) {
      const auto spans = label_chunks(index, note_chunks[i], config.frequency);
      const auto& inv = to_original[i];
      auto& pooled = frequency_pooled[i];
      for (const auto& span : spans) {
        PooledSpan base;
        base.templated = span.templated;
        base.copied = span.copied;
        base.from_frequency = true;
        base.source_ids = {"chunk:" + hex64(fnv1a64(span.key))};
        if (span.copied) base.copy_group_keys = {"freq:" + span.key};
        // Chunk ranges live in intermediate coordinates; map back to the
        // original text, splitting where reference removals interrupt the
        // run. Pieces stay adjacent to the removed seam, so overlap
        // resolution reunites them into a single resolved span.
        std::size_t piece_start = inv[span.start];
        std::size_t prev = piece_start;
        for (std::size_t pos = span.start + 1; pos <= span.end; ++pos) {
          const bool flush = pos == span.end || inv[pos] != prev + 1;
          if (flush) {
            PooledSpan piece = base;
            piece.start = piece_start;
            piece.end = prev + 1;
            pooled.push_back(std::move(piece));
            if (pos < span.end) {
              piece_start = inv[pos];
              prev = piece_start;
            }
          } else {
            prev = inv[pos];
          }
        }
      }
    });
  }

  // --- Final resolution, dedup and condensation ----------------------------
  std::vector<std::vector<ResolvedSpan>> resolved(note_count);
  parallel_for(note_count, config.workers, [&](std::size_t i) {
    std::vector<PooledSpan> pooled = std::move(reference_pooled[i]);
    pooled.insert(pooled.end(), std::make_move_iterator(frequency_pooled[i].begin()),
                  std::make_move_iterator(frequency_pooled[i].end()));
    resolved[i] = resolve_overlaps(note_at(i).note_id, std::move(pooled), texts[i].size());
  });
  for (std::size_t t = 0, i = 0; t < corpus.timelines.size(); ++t) {
    const auto& timeline = corpus.timelines[t];
    apply_dedup_policy(timeline, {resolved.data() + i, timeline.notes.size()});
    i += timeline.notes.size();
  }

  result.notes.resize(note_count);
  parallel_for(note_count, config.workers, [&](std::size_t i) {
    CondenseResult cr =
        condense_note(note_at(i), texts[i], std::move(resolved[i]), config.condense_marker);
    result.notes[i] = std::move(cr.annotated);
  });
  return result;
}

void write_condensed_jsonl(const PipelineResult& result, std::ostream& out) {
  for (const auto& annotated : result.notes) {
    Note note = annotated.note;
    note.text = annotated.condensed_text;
    json j = json::parse(note_to_json_line(note));
    j["removed_chars"] = annotated.removed_chars;
    out << j.dump() << '\n';
  }
}

namespace {

json span_to_json(const ResolvedSpan& span) {
  json j;
  j["start"] = span.start;
  j["end"] = span.end;
  j["label"] = to_string(span.label);
  json modules = json::array();
  if (span.from_reference) modules.push_back("reference");
  if (span.from_frequency) modules.push_back("frequency");
  j["modules"] = std::move(modules);
  j["source_ids"] = span.source_ids;
  j["action"] = to_string(span.action);
  return j;
}

}  // namespace

void write_sidecar_jsonl(const PipelineResult& result, std::ostream& out) {
  for (const auto& annotated : result.notes) {
    json j;
    j["note_id"] = annotated.note.note_id;
    json spans = json::array();
    for (const auto& span : annotated.spans) spans.push_back(span_to_json(span));
    j["spans"] = std::move(spans);
    out << j.dump() << '\n';
  }
}

ResolvedLabel label_from_string(const std::string& s) {
  if (s == "templated") return ResolvedLabel::templated;
  if (s == "copied") return ResolvedLabel::copied;
  if (s == "both") return ResolvedLabel::both;
  throw DataError("unknown span label \"" + s + "\"");
}

SpanAction action_from_string(const std::string& s) {
  if (s == "remove") return SpanAction::remove;
  if (s == "keep_first_instance_kept") return SpanAction::keep_first_instance_kept;
  if (s == "keep_first_instance_removed") return SpanAction::keep_first_instance_removed;
  throw DataError("unknown span action \"" + s + "\"");
}

std::vector<SidecarNote> read_sidecar_jsonl(std::istream& in) {
  std::vector<SidecarNote> notes;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError("sidecar line " + std::to_string(line_no) + ": " + e.what());
    }
    SidecarNote note;
    try {
      note.note_id = j.at("note_id").get<std::string>();
      for (const auto& sj : j.at("spans")) {
        ResolvedSpan span;
        span.note_id = note.note_id;
        span.start = sj.at("start").get<std::size_t>();
        span.end = sj.at("end").get<std::size_t>();
        span.label = label_from_string(sj.at("label").get<std::string>());
        for (const auto& m : sj.at("modules")) {
          const auto name = m.get<std::string>();
          if (name == "reference") span.from_reference = true;
          else if (name == "frequency") span.from_frequency = true;
          else throw DataError("unknown module \"" + name + "\"");
        }
        if (sj.contains("source_ids"))
          span.source_ids = sj.at("source_ids").get<std::vector<std::string>>();
        span.action = action_from_string(sj.at("action").get<std::string>());
        if (span.start >= span.end)
          throw DataError("empty or inverted span in note " + note.note_id);
        note.spans.push_back(std::move(span));
      }
    } catch (const json::exception& e) {
      throw DataError("sidecar line " + std::to_string(line_no) + ": " + e.what());
    }
    std::sort(note.spans.begin(), note.spans.end(),
              [](const ResolvedSpan& a, const ResolvedSpan& b) { return a.start < b.start; });
    notes.push_back(std::move(note));
  }
  return notes;
}

std::vector<SidecarNote> read_sidecar_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open sidecar file: " + path);
  return read_sidecar_jsonl(in);
}

}  // namespace trace
