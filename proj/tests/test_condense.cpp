#include "trace/condense.hpp"

#include <doctest.h>

#include <random>

#include "trace/util.hpp"

using namespace trace;

namespace {

Note make_note(const std::string& id, const std::string& text,
               const std::string& filed = "2021-01-01T00:00:00Z") {
  Note n;
  n.note_id = id;
  n.patient_id = "p1";
  n.filed_at = parse_timestamp(filed);
  n.note_type = "Progress Notes";
  n.text = text;
  return n;
}

PooledSpan pooled(std::size_t start, std::size_t end, bool templated, bool copied,
                  const std::string& group = {}) {
  PooledSpan p;
  p.start = start;
  p.end = end;
  p.templated = templated;
  p.copied = copied;
  p.from_reference = true;
  p.source_ids = {"src"};
  if (copied && !group.empty()) p.copy_group_keys = {group};
  return p;
}

}  // namespace

TEST_SUITE("condense") {

TEST_CASE("overlapping templated and copied spans union with templated precedence") {
  auto resolved = resolve_overlaps("n", {pooled(0, 60, true, false), pooled(50, 120, false, true, "g")}, 200);
  REQUIRE(resolved.size() == 1);
  CHECK(resolved[0].start == 0);
  CHECK(resolved[0].end == 120);
  CHECK(resolved[0].label == ResolvedLabel::both);
  CHECK(resolved[0].action == SpanAction::remove);
}

TEST_CASE("disjoint spans stay separate") {
  auto resolved = resolve_overlaps("n", {pooled(0, 10, true, false), pooled(20, 30, true, false)}, 100);
  CHECK(resolved.size() == 2);
}

TEST_CASE("identical spans from both modules collapse to one") {
  PooledSpan ref = pooled(5, 95, true, false);
  PooledSpan freq = pooled(5, 95, true, false);
  freq.from_reference = false;
  freq.from_frequency = true;
  freq.source_ids = {"chunk:abc"};
  auto resolved = resolve_overlaps("n", {ref, freq}, 100);
  REQUIRE(resolved.size() == 1);
  CHECK(resolved[0].from_reference);
  CHECK(resolved[0].from_frequency);
  CHECK(resolved[0].label == ResolvedLabel::templated);
  CHECK(resolved[0].source_ids == std::vector<std::string>{"chunk:abc", "src"});
}

TEST_CASE("adjacent flagged ranges union") {
  auto resolved = resolve_overlaps("n", {pooled(0, 5, true, false), pooled(5, 9, true, false)}, 10);
  REQUIRE(resolved.size() == 1);
  CHECK(resolved[0].start == 0);
  CHECK(resolved[0].end == 9);
}

TEST_CASE("out-of-bounds spans are rejected") {
  CHECK_THROWS_AS(resolve_overlaps("n", {pooled(0, 11, true, false)}, 10), DataError);
}

TEST_CASE("dedup keeps the first copied instance per group") {
  Timeline timeline;
  timeline.patient_id = "p1";
  timeline.notes = {make_note("n1", "one", "2021-01-01T00:00:00Z"),
                    make_note("n2", "two", "2021-02-01T00:00:00Z")};
  std::vector<std::vector<ResolvedSpan>> spans(2);
  spans[0] = resolve_overlaps("n1", {pooled(0, 3, false, true, "g")}, 3);
  spans[1] = resolve_overlaps("n2", {pooled(0, 3, false, true, "g")}, 3);
  apply_dedup_policy(timeline, spans);
  CHECK(spans[0][0].action == SpanAction::keep_first_instance_kept);
  CHECK(spans[1][0].action == SpanAction::keep_first_instance_removed);
}

TEST_CASE("a copied chunk appearing once is kept") {
  Timeline timeline;
  timeline.patient_id = "p1";
  timeline.notes = {make_note("n1", "one")};
  std::vector<std::vector<ResolvedSpan>> spans(1);
  spans[0] = resolve_overlaps("n1", {pooled(0, 3, false, true, "g")}, 3);
  apply_dedup_policy(timeline, spans);
  CHECK(spans[0][0].action == SpanAction::keep_first_instance_kept);
}

TEST_CASE("templated spans are removed in every note") {
  Timeline timeline;
  timeline.patient_id = "p1";
  std::vector<std::vector<ResolvedSpan>> spans;
  for (int i = 0; i < 10; ++i) {
    const std::string id = "n" + std::to_string(i);
    timeline.notes.push_back(make_note(id, "xxxx", "2021-01-0" + std::to_string(1 + i % 9) +
                                                       "T00:00:00Z"));
    spans.push_back(resolve_overlaps(id, {pooled(0, 4, true, false)}, 4));
  }
  timeline = order_timeline(std::move(timeline.notes));
  apply_dedup_policy(timeline, spans);
  for (const auto& per_note : spans) CHECK(per_note[0].action == SpanAction::remove);
}

TEST_CASE("within a note the earlier copied occurrence wins") {
  Timeline timeline;
  timeline.patient_id = "p1";
  timeline.notes = {make_note("n1", std::string(40, 'x'))};
  std::vector<std::vector<ResolvedSpan>> spans(1);
  spans[0] = resolve_overlaps(
      "n1", {pooled(20, 30, false, true, "g"), pooled(0, 10, false, true, "g")}, 40);
  apply_dedup_policy(timeline, spans);
  REQUIRE(spans[0].size() == 2);
  CHECK(spans[0][0].start == 0);
  CHECK(spans[0][0].action == SpanAction::keep_first_instance_kept);
  CHECK(spans[0][1].action == SpanAction::keep_first_instance_removed);
}

TEST_CASE("deletion semantics") {
  const Note note = make_note("n1", "AAABBBCCC");
  auto spans = resolve_overlaps("n1", {pooled(3, 6, true, false)}, 9);
  const auto result = condense_note(note, utf8_to_u32(note.text), spans);
  CHECK(result.annotated.condensed_text == "AAACCC");
  CHECK(result.annotated.removed_chars == 3);
  CHECK(result.original_to_condensed[2] == 2);
  CHECK(result.original_to_condensed[3] == kRemovedOffset);
  CHECK(result.original_to_condensed[6] == 3);

  const auto untouched = condense_note(note, utf8_to_u32(note.text), {});
  CHECK(untouched.annotated.condensed_text == note.text);
  CHECK(untouched.annotated.removed_chars == 0);

  const auto total = condense_note(note, utf8_to_u32(note.text),
                                   resolve_overlaps("n1", {pooled(0, 9, true, false)}, 9));
  CHECK(total.annotated.condensed_text == "");
  CHECK(total.annotated.removed_chars == 9);
}

TEST_CASE("kept first instances do not remove text") {
  const Note note = make_note("n1", "keep me here");
  auto spans = resolve_overlaps("n1", {pooled(0, 4, false, true, "g")}, 12);
  Timeline timeline;
  timeline.patient_id = "p1";
  timeline.notes = {note};
  apply_dedup_policy(timeline, {&spans, 1});
  const auto result = condense_note(note, utf8_to_u32(note.text), spans);
  CHECK(result.annotated.condensed_text == note.text);
  CHECK(result.annotated.removed_chars == 0);
  REQUIRE(result.annotated.spans.size() == 1);
  CHECK(result.annotated.spans[0].action == SpanAction::keep_first_instance_kept);
}

TEST_CASE("marker insertion marks removal sites") {
  const Note note = make_note("n1", "AAABBBCCC");
  auto spans = resolve_overlaps("n1", {pooled(3, 6, true, false)}, 9);
  const auto result = condense_note(note, utf8_to_u32(note.text), spans, "[...]");
  CHECK(result.annotated.condensed_text == "AAA[...]CCC");
  CHECK(result.annotated.removed_chars == 3);
}

TEST_CASE("length conservation and retained-order preservation on random notes") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t len = 1 + rng() % 400;
    std::u32string text(len, U'a');
    for (auto& c : text) c = static_cast<char32_t>(U'a' + rng() % 26);
    const Note note = make_note("n", u32_to_utf8(text));

    std::vector<PooledSpan> raw;
    const int span_count = static_cast<int>(rng() % 8);
    for (int s = 0; s < span_count; ++s) {
      const std::size_t start = rng() % len;
      const std::size_t end = std::min<std::size_t>(start + 1 + rng() % 60, len);
      raw.push_back(pooled(start, end, rng() % 2 == 0, rng() % 2 == 0 || true, "g" + std::to_string(rng() % 3)));
    }
    auto resolved = resolve_overlaps("n", raw, len);
    Timeline timeline;
    timeline.patient_id = "p1";
    timeline.notes = {note};
    apply_dedup_policy(timeline, {&resolved, 1});
    const auto result = condense_note(note, text, resolved);

    const auto condensed = utf8_to_u32(result.annotated.condensed_text);
    CHECK(text.size() == condensed.size() + result.annotated.removed_chars);

    // Every retained character appears in order.
    std::u32string expected;
    for (std::size_t i = 0; i < len; ++i) {
      const bool removed = std::any_of(result.annotated.spans.begin(),
                                       result.annotated.spans.end(), [&](const ResolvedSpan& sp) {
                                         return sp.removes_text() && sp.start <= i && i < sp.end;
                                       });
      if (!removed) expected.push_back(text[i]);
    }
    CHECK(condensed == expected);

    // Idempotence: condensing the result with no spans is the identity.
    const Note again = make_note("n2", result.annotated.condensed_text);
    const auto retry = condense_note(again, condensed, {});
    CHECK(retry.annotated.condensed_text == result.annotated.condensed_text);
  }
}

TEST_CASE("first-instance guarantee over random copied groups") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 100; ++trial) {
    Timeline timeline;
    timeline.patient_id = "p1";
    const int note_count = 1 + static_cast<int>(rng() % 6);
    std::vector<std::vector<ResolvedSpan>> spans(note_count);
    for (int i = 0; i < note_count; ++i) {
      const std::string id = "n" + std::to_string(i);
      timeline.notes.push_back(
          make_note(id, std::string(100, 'x'),
                    "2021-01-" + std::string(i + 1 < 10 ? "0" : "") + std::to_string(i + 1) +
                        "T00:00:00Z"));
      std::vector<PooledSpan> raw;
      const int k = static_cast<int>(rng() % 3);
      for (int s = 0; s < k; ++s) {
        const std::size_t start = (rng() % 4) * 25;
        raw.push_back(pooled(start, start + 20, false, true, "g" + std::to_string(rng() % 2)));
      }
      spans[i] = resolve_overlaps(id, raw, 100);
    }
    apply_dedup_policy(timeline, spans);

    // Each group with members has exactly one kept span, minimal in
    // (filed_at, note_id, start) order; spans here carry a single key.
    std::map<std::string, std::vector<std::pair<int, const ResolvedSpan*>>> groups;
    for (int i = 0; i < note_count; ++i)
      for (const auto& sp : spans[i])
        for (const auto& key : sp.copy_group_keys) groups[key].emplace_back(i, &sp);
    for (const auto& [key, members] : groups) {
      std::size_t kept = 0;
      for (const auto& [idx, sp] : members)
        if (sp->action == SpanAction::keep_first_instance_kept) ++kept;
      if (members.size() >= 1) CHECK(kept == 1);
      const auto& [first_idx, first_span] = members.front();
      CHECK(first_span->action == SpanAction::keep_first_instance_kept);
    }
  }
}

}  // TEST_SUITE
