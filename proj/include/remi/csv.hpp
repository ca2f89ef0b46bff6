#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace remi {

// Minimal comma-separated reader for the flat tables this project exchanges.
// No quoting or escaping: none of the schemas carry free text with commas.
// Malformed content raises DataError naming file, line and column.

struct CsvTable {
    std::string path;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows; // data rows, header excluded
};

CsvTable read_csv(const std::string& path, const std::vector<std::string>& expected_header);

std::vector<std::string> split_csv_line(std::string_view line);

// Typed field access with location-bearing errors. row/col are 0-based data
// coordinates; reported positions are 1-based and count the header line.
double csv_double(const CsvTable& table, std::size_t row, std::size_t col);
long csv_long(const CsvTable& table, std::size_t row, std::size_t col);
const std::string& csv_str(const CsvTable& table, std::size_t row, std::size_t col);

// Fixed-format float for serialized outputs: shortest round-trippable decimal
// (printf %.17g trimmed by re-parsing at lower precisions).
std::string format_double(double v);

void write_text_file(const std::string& path, const std::string& content);

} // namespace remi
