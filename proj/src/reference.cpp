#include "trace/reference.hpp"

#include <algorithm>
#include <map>

#include "trace/util.hpp"

namespace trace {

namespace {

std::vector<CandidateSpan> blocks_to_spans(const Note& note, const std::vector<MatchBlock>& blocks,
                                           SpanLabel label, const std::string& source_id) {
  std::vector<CandidateSpan> spans;
  spans.reserve(blocks.size());
  for (const auto& b : blocks) {
    CandidateSpan s;
    s.note_id = note.note_id;
    s.start = b.note_start;
    s.end = b.note_start + b.length;
    s.label = label;
    s.source_id = source_id;
    s.source_start = b.source_start;
    s.source_end = b.source_start + b.length;
    spans.push_back(std::move(s));
  }
  return spans;
}

}  // namespace

NoteIndex build_note_index(const Corpus& corpus) {
  NoteIndex index;
  index.reserve(corpus.note_count());
  for (const auto& timeline : corpus.timelines)
    for (const auto& note : timeline.notes) index.emplace(note.note_id, &note);
  return index;
}

std::vector<CandidateSpan> extract_spans(const Note& note, std::u32string_view note_text,
                                         const TemplateSource& source) {
  const std::u32string source_text = utf8_to_u32(source.text);
  return blocks_to_spans(note, align(source_text, note_text), SpanLabel::templated,
                         source.template_id);
}

std::vector<CandidateSpan> extract_spans(const Note& note, std::u32string_view note_text,
                                         const Note& copy_source) {
  const std::u32string source_text = utf8_to_u32(copy_source.text);
  return blocks_to_spans(note, align(source_text, note_text), SpanLabel::copied,
                         copy_source.note_id);
}

std::vector<CandidateSpan> merge_whitespace_gaps(std::vector<CandidateSpan> spans,
                                                 std::u32string_view note_text) {
  if (spans.empty()) return spans;

  const auto gap_is_whitespace = [&](std::size_t from, std::size_t to) {
    for (std::size_t i = from; i < to; ++i) {
      const char32_t c = note_text[i];
      if (c != U' ' && c != U'\t' && c != U'\n' && c != U'\r') return false;
    }
    return true;  // vacuously true for adjacent spans
  };

  // Merge within each (label, source_id) group, then re-pool.
  std::map<std::pair<int, std::string>, std::vector<CandidateSpan>> groups;
  for (auto& s : spans)
    groups[{static_cast<int>(s.label), s.source_id}].push_back(std::move(s));

  std::vector<CandidateSpan> out;
  out.reserve(spans.size());
  for (auto& [key, group] : groups) {
    std::sort(group.begin(), group.end(), [](const CandidateSpan& a, const CandidateSpan& b) {
      return a.start != b.start ? a.start < b.start : a.end < b.end;
    });
    CandidateSpan current = std::move(group.front());
    for (std::size_t i = 1; i < group.size(); ++i) {
      CandidateSpan& next = group[i];
      if (next.start <= current.end ||
          gap_is_whitespace(current.end, next.start)) {
        current.end = std::max(current.end, next.end);
        current.source_start = std::min(current.source_start, next.source_start);
        current.source_end = std::max(current.source_end, next.source_end);
      } else {
        out.push_back(std::move(current));
        current = std::move(next);
      }
    }
    out.push_back(std::move(current));
  }

  std::sort(out.begin(), out.end(), [](const CandidateSpan& a, const CandidateSpan& b) {
    if (a.start != b.start) return a.start < b.start;
    if (a.end != b.end) return a.end < b.end;
    if (a.label != b.label) return a.label < b.label;
    return a.source_id < b.source_id;
  });
  return out;
}

std::vector<CandidateSpan> filter_min_length(std::vector<CandidateSpan> spans,
                                             std::size_t min_chars) {
  std::erase_if(spans, [min_chars](const CandidateSpan& s) { return s.length() < min_chars; });
  return spans;
}

ReferenceResult run_reference_module(const Note& note, const NoteIndex& index,
                                     const ReferenceConfig& config) {
  ReferenceResult result;
  if (note.template_sources.empty() && note.copy_source_ids.empty()) return result;

  const std::u32string note_text = utf8_to_u32(note.text);

  std::vector<CandidateSpan> pooled;
  for (const auto& source : note.template_sources) {
    auto spans = extract_spans(note, note_text, source);
    pooled.insert(pooled.end(), std::make_move_iterator(spans.begin()),
                  std::make_move_iterator(spans.end()));
  }
  for (const auto& source_id : note.copy_source_ids) {
    const auto it = index.find(source_id);
    const Note* source = it != index.end() ? it->second : nullptr;
    if (source == nullptr) {
      result.warnings.push_back("note " + note.note_id + ": copy source \"" + source_id +
                                "\" not in corpus, skipped");
      continue;
    }
    if (source->note_id == note.note_id) {
      result.warnings.push_back("note " + note.note_id + ": copy source is the note itself, skipped");
      continue;
    }
    if (config.copy_scope == CopyScope::patient && source->patient_id != note.patient_id) {
      result.warnings.push_back("note " + note.note_id + ": copy source \"" + source_id +
                                "\" belongs to another patient, skipped (copy_scope=patient)");
      continue;
    }
    auto spans = extract_spans(note, note_text, *source);
    pooled.insert(pooled.end(), std::make_move_iterator(spans.begin()),
                  std::make_move_iterator(spans.end()));
  }

  pooled = merge_whitespace_gaps(std::move(pooled), note_text);
  result.spans = filter_min_length(std::move(pooled), config.min_span_chars);
  return result;
}

}  // namespace trace
