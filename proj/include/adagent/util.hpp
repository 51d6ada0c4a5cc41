#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace adagent {

// ---- strings ----

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

// Collapses every whitespace run to a single space and trims the ends.
// Canonical form used for replay keying.
std::string normalize_ws(std::string_view s);

// Lowercase with '-', '_' and spaces stripped; the registry's alias form.
std::string squash_name(std::string_view s);

bool starts_with_ci(std::string_view s, std::string_view prefix);

// ---- hashing ----

std::uint64_t fnv1a64(std::string_view bytes);
std::string to_hex(std::uint64_t v);

// Content digest of a file (streaming FNV-1a). Used to assert that sandboxed
// runs never touch real datasets.
std::uint64_t file_digest(const std::filesystem::path& p);

// ---- time ----

using TimePoint = std::chrono::system_clock::time_point;

std::string to_iso8601_utc(TimePoint t);
std::optional<TimePoint> parse_iso8601_utc(std::string_view s);

// ---- filesystem ----

std::string read_text_file(const std::filesystem::path& p);
void write_text_file(const std::filesystem::path& p, std::string_view content);

// Write to a sibling temp file, then rename over the target. A crash mid-write
// leaves either the old file or the new one, never a torn file.
void atomic_write_file(const std::filesystem::path& p, std::string_view content);

// Fresh unique directory under the system temp root. Caller owns cleanup
// (see TempDir).
std::filesystem::path make_temp_dir(std::string_view prefix);

class TempDir {
public:
    explicit TempDir(std::string_view prefix) : path_(make_temp_dir(prefix)) {}
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

// ---- deterministic randomness ----

// SplitMix64. Deterministic across platforms, unlike <random> distributions;
// every seeded fixture and synthetic sample goes through this.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64();
    double next_double();                       // uniform [0, 1)
    double next_gaussian();                     // Box-Muller on own uniforms
    std::size_t next_index(std::size_t bound);  // uniform [0, bound)

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// ---- numeric ----

// Empirical quantile with linear interpolation between order statistics
// (the numpy default). q in [0, 1]; values need not be sorted.
double quantile_linear(std::vector<double> values, double q);

// Shortest round-trippable decimal form of a double ("0.1", not "0.100000").
std::string format_double(double v);

} // namespace adagent
