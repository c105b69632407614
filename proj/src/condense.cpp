#include "trace/condense.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

#include "trace/util.hpp"

namespace trace {

namespace {

void sort_unique(std::vector<std::string>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

const char* to_string(ResolvedLabel label) {
  switch (label) {
    case ResolvedLabel::templated: return "templated";
    case ResolvedLabel::copied: return "copied";
    case ResolvedLabel::both: return "both";
  }
  return "?";
}

const char* to_string(SpanAction action) {
  switch (action) {
    case SpanAction::remove: return "remove";
    case SpanAction::keep_first_instance_kept: return "keep_first_instance_kept";
    case SpanAction::keep_first_instance_removed: return "keep_first_instance_removed";
  }
  return "?";
}

std::vector<ResolvedSpan> resolve_overlaps(const std::string& note_id,
                                           std::vector<PooledSpan> spans,
                                           std::size_t note_length) {
  std::vector<ResolvedSpan> out;
  std::erase_if(spans, [](const PooledSpan& s) { return s.start == s.end; });
  if (spans.empty()) return out;

  for (const auto& s : spans) {
    if (s.start > s.end || s.end > note_length)
      throw DataError("span [" + std::to_string(s.start) + "," + std::to_string(s.end) +
                      ") out of bounds for note " + note_id + " (length " +
                      std::to_string(note_length) + ")");
  }

  std::sort(spans.begin(), spans.end(), [](const PooledSpan& a, const PooledSpan& b) {
    return a.start != b.start ? a.start < b.start : a.end < b.end;
  });

  ResolvedSpan current;
  bool current_templated = false;
  bool current_copied = false;
  const auto absorb = [&](PooledSpan& s) {
    current.end = std::max(current.end, s.end);
    current_templated |= s.templated;
    current_copied |= s.copied;
    current.from_reference |= s.from_reference;
    current.from_frequency |= s.from_frequency;
    current.source_ids.insert(current.source_ids.end(),
                              std::make_move_iterator(s.source_ids.begin()),
                              std::make_move_iterator(s.source_ids.end()));
    current.copy_group_keys.insert(current.copy_group_keys.end(),
                                   std::make_move_iterator(s.copy_group_keys.begin()),
                                   std::make_move_iterator(s.copy_group_keys.end()));
  };
  const auto finish = [&] {
    current.note_id = note_id;
    current.label = current_templated ? (current_copied ? ResolvedLabel::both : ResolvedLabel::templated)
                                      : ResolvedLabel::copied;
    // Provisional: the dedup policy decides the fate of copied-only spans.
    current.action = current_templated ? SpanAction::remove : SpanAction::keep_first_instance_kept;
    sort_unique(current.source_ids);
    sort_unique(current.copy_group_keys);
    out.push_back(std::move(current));
    current = ResolvedSpan{};
    current_templated = current_copied = false;
  };

  current.start = spans.front().start;
  current.end = spans.front().start;
  absorb(spans.front());
  for (std::size_t i = 1; i < spans.size(); ++i) {
    PooledSpan& s = spans[i];
    if (s.start <= current.end) {  // overlapping or adjacent
      absorb(s);
    } else {
      finish();
      current.start = s.start;
      current.end = s.start;
      absorb(s);
    }
  }
  finish();
  return out;
}

void apply_dedup_policy(const Timeline& timeline,
                        std::span<std::vector<ResolvedSpan>> spans_per_note) {
  if (spans_per_note.size() != timeline.notes.size())
    throw std::logic_error("apply_dedup_policy: spans_per_note misaligned with timeline");

  std::unordered_set<std::string> seen_groups;
  for (std::size_t i = 0; i < timeline.notes.size(); ++i) {
    auto& spans = spans_per_note[i];
    std::sort(spans.begin(), spans.end(),
              [](const ResolvedSpan& a, const ResolvedSpan& b) { return a.start < b.start; });
    for (auto& span : spans) {
      if (span.label != ResolvedLabel::copied) {
        // Templated precedence: deleted everywhere. Any copied identity it
        // absorbed stays unclaimed so the group's first copied-only member
        // is still kept somewhere.
        span.action = SpanAction::remove;
        continue;
      }
      bool first_instance = span.copy_group_keys.empty();
      for (const auto& key : span.copy_group_keys)
        if (seen_groups.insert(key).second) first_instance = true;
      span.action = first_instance ? SpanAction::keep_first_instance_kept
                                   : SpanAction::keep_first_instance_removed;
    }
  }
}

CondenseResult condense_note(const Note& note, std::u32string_view note_text,
                             std::vector<ResolvedSpan> spans, const std::string& marker) {
  std::sort(spans.begin(), spans.end(),
            [](const ResolvedSpan& a, const ResolvedSpan& b) { return a.start < b.start; });

  std::vector<std::pair<std::size_t, std::size_t>> removals;
  for (const auto& s : spans) {
    if (s.end > note_text.size() || s.start > s.end)
      throw std::logic_error("condense_note: span out of bounds for note " + note.note_id);
    if (!s.removes_text()) continue;
    if (!removals.empty() && s.start < removals.back().second)
      throw std::logic_error("condense_note: overlapping removal ranges in note " + note.note_id);
    removals.emplace_back(s.start, s.end);
  }

  const std::u32string marker_u32 = marker.empty() ? std::u32string{} : utf8_to_u32(marker);

  CondenseResult result;
  result.original_to_condensed.assign(note_text.size(), kRemovedOffset);
  std::u32string condensed;
  condensed.reserve(note_text.size());

  std::size_t pos = 0;
  std::size_t removed = 0;
  for (const auto& [start, end] : removals) {
    for (std::size_t i = pos; i < start; ++i) {
      result.original_to_condensed[i] = condensed.size();
      condensed.push_back(note_text[i]);
    }
    condensed.append(marker_u32);
    removed += end - start;
    pos = end;
  }
  for (std::size_t i = pos; i < note_text.size(); ++i) {
    result.original_to_condensed[i] = condensed.size();
    condensed.push_back(note_text[i]);
  }

  result.annotated.note = note;
  result.annotated.spans = std::move(spans);
  result.annotated.condensed_text = u32_to_utf8(condensed);
  result.annotated.removed_chars = removed;
  return result;
}

}  // namespace trace
