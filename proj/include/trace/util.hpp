#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace trace {

// Thrown for malformed input files, schema violations, and broken
// invariants in data we did not produce. The CLI maps it to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown for bad flags/config combinations. The CLI maps it to exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// All span offsets in this codebase are Unicode scalar-value indices, never
// bytes. Text is decoded to char32_t once per note and algorithms work on
// that representation.
std::u32string utf8_to_u32(std::string_view utf8);
std::string u32_to_utf8(std::u32string_view text);

// 1:1 Unicode lowercase mapping; code points without a single-codepoint
// lowercase form pass through unchanged.
char32_t to_lower(char32_t cp);

bool is_space(char32_t cp);

std::uint64_t fnv1a64(std::string_view data);

// Runs fn(i) for i in [0, n) across `workers` threads (0 = hardware
// concurrency). Callers get determinism by writing results into
// preallocated per-index slots; the partition itself carries no state.
void parallel_for(std::size_t n, unsigned workers,
                  const std::function<void(std::size_t)>& fn);

}  // namespace trace
