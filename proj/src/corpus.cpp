#include "trace/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "trace/util.hpp"

namespace trace {

namespace {

using nlohmann::json;

constexpr std::int64_t kMicrosPerSecond = 1'000'000;

// Days since 1970-01-01 for a proleptic Gregorian civil date.
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yr = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = static_cast<int>(yr + (m <= 2));
}

int parse_fixed_int(std::string_view s, std::size_t pos, std::size_t len,
                    const std::string& what) {
  if (pos + len > s.size()) throw DataError("timestamp too short: missing " + what);
  int value = 0;
  const auto* first = s.data() + pos;
  const auto [ptr, ec] = std::from_chars(first, first + len, value);
  if (ec != std::errc() || ptr != first + len)
    throw DataError("timestamp has non-numeric " + what);
  return value;
}

}  // namespace

Timestamp parse_timestamp(const std::string& iso8601, bool* assumed_utc) {
  std::string_view s{iso8601};
  if (assumed_utc) *assumed_utc = false;

  const int year = parse_fixed_int(s, 0, 4, "year");
  if (s.size() < 19 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') ||
      s[13] != ':' || s[16] != ':')
    throw DataError("timestamp not ISO-8601 (YYYY-MM-DDTHH:MM:SS...): \"" + iso8601 + "\"");
  const int month = parse_fixed_int(s, 5, 2, "month");
  const int day = parse_fixed_int(s, 8, 2, "day");
  const int hour = parse_fixed_int(s, 11, 2, "hour");
  const int minute = parse_fixed_int(s, 14, 2, "minute");
  const int second = parse_fixed_int(s, 17, 2, "second");

  if (month < 1 || month > 12) throw DataError("timestamp month out of range: \"" + iso8601 + "\"");
  static constexpr int kDaysInMonth[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
  const int max_day = kDaysInMonth[month - 1] + (month == 2 && leap ? 1 : 0);
  if (day < 1 || day > max_day) throw DataError("timestamp day out of range: \"" + iso8601 + "\"");
  if (hour > 23 || minute > 59 || second > 60)
    throw DataError("timestamp time out of range: \"" + iso8601 + "\"");

  std::size_t pos = 19;
  std::int64_t micros = 0;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    std::int64_t scale = 100'000;
    std::size_t digits = 0;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
      if (scale > 0) micros += (s[pos] - '0') * scale;
      scale /= 10;
      ++pos;
      ++digits;
    }
    if (digits == 0) throw DataError("timestamp has empty fraction: \"" + iso8601 + "\"");
  }

  std::int64_t offset_seconds = 0;
  if (pos == s.size()) {
    if (assumed_utc) *assumed_utc = true;
  } else if (s[pos] == 'Z' || s[pos] == 'z') {
    if (pos + 1 != s.size()) throw DataError("trailing characters after timestamp: \"" + iso8601 + "\"");
  } else if (s[pos] == '+' || s[pos] == '-') {
    const int sign = s[pos] == '-' ? -1 : 1;
    ++pos;
    const int off_h = parse_fixed_int(s, pos, 2, "zone hour");
    pos += 2;
    if (pos < s.size() && s[pos] == ':') ++pos;
    const int off_m = parse_fixed_int(s, pos, 2, "zone minute");
    pos += 2;
    if (pos != s.size()) throw DataError("trailing characters after timestamp: \"" + iso8601 + "\"");
    if (off_h > 23 || off_m > 59) throw DataError("timestamp zone out of range: \"" + iso8601 + "\"");
    offset_seconds = sign * (off_h * 3600 + off_m * 60);
  } else {
    throw DataError("unexpected character in timestamp: \"" + iso8601 + "\"");
  }

  const std::int64_t days = days_from_civil(year, month, day);
  std::int64_t seconds = days * 86400 + hour * 3600 + minute * 60 + second;
  seconds -= offset_seconds;  // shift local instant back to UTC
  return Timestamp{seconds * kMicrosPerSecond + micros};
}

std::string format_timestamp(Timestamp ts) {
  std::int64_t micros = ts.micros_since_epoch % kMicrosPerSecond;
  std::int64_t seconds = ts.micros_since_epoch / kMicrosPerSecond;
  if (micros < 0) {
    micros += kMicrosPerSecond;
    seconds -= 1;
  }
  std::int64_t days = seconds / 86400;
  std::int64_t secs = seconds % 86400;
  if (secs < 0) {
    secs += 86400;
    days -= 1;
  }
  int y, m, d;
  civil_from_days(days, y, m, d);
  char buf[48];
  const int hh = static_cast<int>(secs / 3600);
  const int mm = static_cast<int>((secs % 3600) / 60);
  const int ss = static_cast<int>(secs % 60);
  int n;
  if (micros != 0) {
    n = std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%06lldZ", y, m, d, hh, mm,
                      ss, static_cast<long long>(micros));
  } else {
    n = std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", y, m, d, hh, mm, ss);
  }
  return std::string(buf, static_cast<std::size_t>(n));
}

bool note_order_less(const Note& a, const Note& b) {
  if (a.filed_at != b.filed_at) return a.filed_at < b.filed_at;
  return a.note_id < b.note_id;
}

std::size_t Corpus::note_count() const {
  std::size_t n = 0;
  for (const auto& t : timelines) n += t.notes.size();
  return n;
}

const Note* Corpus::find_note(const std::string& note_id) const {
  for (const auto& t : timelines)
    for (const auto& n : t.notes)
      if (n.note_id == note_id) return &n;
  return nullptr;
}

namespace {

Note parse_note_object(const json& j, std::size_t line_no) {
  const auto ctx = [line_no] { return " (line " + std::to_string(line_no) + ")"; };
  if (!j.is_object()) throw DataError("note is not a JSON object" + ctx());

  Note note;
  const auto require_string = [&](const char* key) -> std::string {
    const auto it = j.find(key);
    if (it == j.end()) throw DataError(std::string("missing required field \"") + key + "\"" + ctx());
    if (!it->is_string())
      throw DataError(std::string("field \"") + key + "\" must be a string" + ctx());
    return it->get<std::string>();
  };

  note.note_id = require_string("note_id");
  note.patient_id = require_string("patient_id");
  note.filed_at_raw = require_string("filed_at");
  note.note_type = require_string("note_type");
  note.text = require_string("text");

  try {
    note.filed_at = parse_timestamp(note.filed_at_raw);
  } catch (const DataError& e) {
    throw DataError(std::string(e.what()) + ctx());
  }

  if (const auto it = j.find("template_sources"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw DataError("\"template_sources\" must be an array" + ctx());
    for (const auto& src : *it) {
      if (!src.is_object() || !src.contains("template_id") || !src.contains("text"))
        throw DataError("template source needs template_id and text" + ctx());
      TemplateSource ts;
      ts.template_id = src.at("template_id").get<std::string>();
      ts.text = src.at("text").get<std::string>();
      if (ts.text.empty()) throw DataError("template source text must be non-empty" + ctx());
      note.template_sources.push_back(std::move(ts));
    }
  }
  if (const auto it = j.find("copy_source_ids"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw DataError("\"copy_source_ids\" must be an array" + ctx());
    for (const auto& id : *it) {
      if (!id.is_string()) throw DataError("copy_source_ids entries must be strings" + ctx());
      note.copy_source_ids.push_back(id.get<std::string>());
    }
  }
  return note;
}

}  // namespace

Corpus ingest_corpus(std::istream& in, const WarningSink& warn) {
  std::unordered_set<std::string> seen_ids;
  std::map<std::string, std::vector<Note>> by_patient;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;

    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError("malformed JSON on line " + std::to_string(line_no) + ": " + e.what());
    }
    Note note = parse_note_object(j, line_no);

    bool assumed_utc = false;
    parse_timestamp(note.filed_at_raw, &assumed_utc);
    if (assumed_utc && warn)
      warn("note " + note.note_id + ": filed_at has no timezone, assuming UTC");

    if (!seen_ids.insert(note.note_id).second)
      throw DataError("duplicate note_id \"" + note.note_id + "\" on line " +
                      std::to_string(line_no));

    by_patient[note.patient_id].push_back(std::move(note));
  }

  Corpus corpus;
  corpus.timelines.reserve(by_patient.size());
  for (auto& [patient_id, notes] : by_patient)
    corpus.timelines.push_back(order_timeline(std::move(notes)));
  return corpus;
}

Corpus ingest_corpus(const std::string& path, const WarningSink& warn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus file: " + path);
  return ingest_corpus(in, warn);
}

Timeline order_timeline(std::vector<Note> notes) {
  Timeline timeline;
  if (notes.empty()) return timeline;
  timeline.patient_id = notes.front().patient_id;
  for (const auto& n : notes) {
    if (n.patient_id != timeline.patient_id)
      throw DataError("timeline mixes patient_ids \"" + timeline.patient_id + "\" and \"" +
                      n.patient_id + "\"");
  }
  std::sort(notes.begin(), notes.end(), note_order_less);
  timeline.notes = std::move(notes);
  return timeline;
}

std::string note_to_json_line(const Note& note) {
  json j;
  j["note_id"] = note.note_id;
  j["patient_id"] = note.patient_id;
  j["filed_at"] = format_timestamp(note.filed_at);
  j["note_type"] = note.note_type;
  j["text"] = note.text;
  json sources = json::array();
  for (const auto& src : note.template_sources)
    sources.push_back({{"template_id", src.template_id}, {"text", src.text}});
  j["template_sources"] = std::move(sources);
  j["copy_source_ids"] = note.copy_source_ids;
  return j.dump();
}

void write_corpus_jsonl(const Corpus& corpus, std::ostream& out) {
  for (const auto& timeline : corpus.timelines)
    for (const auto& note : timeline.notes) out << note_to_json_line(note) << '\n';
}

}  // namespace trace
