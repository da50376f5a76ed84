#ifndef MML_TEXT_IO_HPP
#define MML_TEXT_IO_HPP

// Locale-independent number formatting/parsing and small text helpers used
// by every file format in the project.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mml {

// Shortest decimal text that round-trips to the same double. Always uses '.'.
std::string format_real(double value);
// Fixed-precision variant for human-facing tables and plots.
std::string format_fixed(double value, int digits);

// Whole-string parse; returns false on trailing junk, empty input or overflow.
bool parse_real(std::string_view text, double &out);
bool parse_size(std::string_view text, std::size_t &out);

std::string_view trim(std::string_view text);
std::vector<std::string> split(std::string_view text, char sep);
std::vector<std::string> split_ws(std::string_view text);

std::vector<std::string> read_lines(const std::filesystem::path &path);

// Writes to a temporary sibling file and renames it into place, so readers
// never observe a partially written file.
void write_file_atomic(const std::filesystem::path &path, std::string_view content);

} // namespace mml

#endif
