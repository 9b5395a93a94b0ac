#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace maxfield {

/// Malformed input file. line() is 1-based, 0 when not tied to a line.
class CsvError : public std::runtime_error {
 public:
  CsvError(const std::string& what, std::size_t line) : std::runtime_error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct CsvRow {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

struct CsvTable {
  std::vector<std::string> header;  // empty when the file has no header row
  std::vector<CsvRow> rows;
};

/// Comma-separated, no quoting. Blank lines are skipped; a trailing CR is
/// stripped. The first row is taken as a header when its first field does
/// not parse as a number.
CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(std::string_view text, std::string_view source = "<memory>");

double parse_double(std::string_view field, std::size_t line, std::size_t column);
long long parse_integer(std::string_view field, std::size_t line, std::size_t column);

/// Shortest round-trip decimal representation.
std::string format_double(double x);

/// Writes text with LF line endings, creating parent directories.
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace maxfield
