#pragma once

// Minimal RFC-4180 reader and writer: quoted fields, doubled quotes, embedded
// separators and line breaks, CRLF or LF record endings.

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lsmdp::csv {

using Row = std::vector<std::string>;

// Throws ValidationError on an unterminated quoted field.
std::vector<Row> read(std::istream& in);
// Throws IoError when the file cannot be opened.
std::vector<Row> read_file(const std::filesystem::path& path);

std::string escape_field(std::string_view field);
void write_row(std::ostream& out, std::span<const std::string> fields);

// Parses a whole field as a finite double. Throws ValidationError naming
// `context` otherwise.
double parse_double(std::string_view field, std::string_view context);

// Shortest representation that round-trips through parse_double.
std::string format_double(double v);

}  // namespace lsmdp::csv
