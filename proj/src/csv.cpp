#include "remi/csv.hpp"

#include "remi/errors.hpp"

#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace remi {

namespace {

[[noreturn]] void fail_at(const std::string& path, std::size_t line_1, std::size_t col_1,
                          const std::string& what) {
    std::ostringstream os;
    os << path << ":" << line_1 << ":" << col_1 << ": " << what;
    throw DataError(os.str());
}

} // namespace

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.emplace_back(line.substr(start));
            break;
        }
        fields.emplace_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

CsvTable read_csv(const std::string& path, const std::vector<std::string>& expected_header) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);

    CsvTable table;
    table.path = path;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (line_no == 1) {
            table.header = std::move(fields);
            if (!expected_header.empty() && table.header != expected_header) {
                std::string want;
                for (std::size_t i = 0; i < expected_header.size(); ++i)
                    want += (i ? "," : "") + expected_header[i];
                fail_at(path, 1, 1, "unexpected header, want: " + want);
            }
            continue;
        }
        if (fields.size() != table.header.size())
            fail_at(path, line_no, fields.size(),
                    "expected " + std::to_string(table.header.size()) + " fields, got "
                        + std::to_string(fields.size()));
        table.rows.push_back(std::move(fields));
    }
    if (table.header.empty()) throw DataError(path + ": empty file");
    return table;
}

double csv_double(const CsvTable& table, std::size_t row, std::size_t col) {
    const std::string& s = table.rows[row][col];
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        fail_at(table.path, row + 2, col + 1, "not a number: '" + s + "'");
    return v;
}

long csv_long(const CsvTable& table, std::size_t row, std::size_t col) {
    const std::string& s = table.rows[row][col];
    long v = 0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        fail_at(table.path, row + 2, col + 1, "not an integer: '" + s + "'");
    return v;
}

const std::string& csv_str(const CsvTable& table, std::size_t row, std::size_t col) {
    const std::string& s = table.rows[row][col];
    if (s.empty()) fail_at(table.path, row + 2, col + 1, "empty field");
    return s;
}

std::string format_double(double v) {
    char buf[64];
    std::string best;
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(buf, "%lf", &back);
        if (back == v && (best.empty() || std::strlen(buf) < best.size())) best = buf;
    }
    if (!best.empty()) return best;
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << content;
    if (!out) throw DataError("failed writing " + path);
}

} // namespace remi
