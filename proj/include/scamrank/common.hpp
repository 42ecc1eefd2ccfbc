#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace scamrank {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (JSON, CSV, config files). Carries the 1-based line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

// Directory holding bundled config files (PSL, word table, lexicons).
std::filesystem::path data_dir();
void set_data_dir(std::filesystem::path dir);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// Reads a newline-separated list; blank lines and '#' comments are skipped.
std::vector<std::string> read_lines(const std::filesystem::path& path);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
std::vector<std::string> split_whitespace(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

// 64-bit FNV-1a; stable across platforms, used for seeds and digests.
std::uint64_t fnv1a(std::string_view s, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

// RFC 4180-ish CSV: quotes fields containing separators, quotes or newlines.
std::string csv_escape(std::string_view field);
std::vector<std::string> parse_csv_line(std::string_view line);

// Shortest round-trip formatting of a double.
std::string format_double(double v);

}  // namespace scamrank
