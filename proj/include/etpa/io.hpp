#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "etpa/analysis.hpp"
#include "etpa/scan.hpp"

namespace etpa {

std::uint64_t fnv1a64(std::string_view data);
std::string to_hex(std::uint64_t value);

// Shortest representation that round-trips a double.
std::string format_double(double value);

// Write-temp-then-rename so partially written files are never observed.
void atomic_write_text(const std::filesystem::path& path, const std::string& content);

using MetaList = std::vector<std::pair<std::string, std::string>>;

// Two-column CSV with '#'-prefixed key=value metadata lines and a header row.
std::string trace_csv(const DelayTrace& trace, const MetaList& meta);
std::string spectrum_csv(const Spectrum& sp, const MetaList& meta);

// Self-contained spectrum plot. Detected peaks are circled, expected line
// positions are marked with triangles. No timestamps, so identical inputs
// give identical files.
std::string spectrum_svg(const Spectrum& sp, const std::vector<double>& expected_lines,
                         const PeakSet* peaks, const std::string& title,
                         const MetaList& meta);

// Verbosity from the ETPA_LOG environment variable:
// quiet | warn (default) | info | debug.
enum class LogLevel { Quiet = 0, Warn = 1, Info = 2, Debug = 3 };
LogLevel log_level();
void log_warn(const std::string& msg);
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace etpa
