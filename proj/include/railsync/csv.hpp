#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

// Minimal CSV plumbing shared by the native bundle, GTFS subset and all
// report writers. Lines starting with '#' are comments (used to embed the
// run configuration) and are skipped by every reader.

namespace railsync {

class CsvError : public std::runtime_error {
public:
    CsvError(const std::string& file, int line, const std::string& what);
    const std::string& file() const { return file_; }
    int line() const { return line_; }

private:
    std::string file_;
    int line_ = 0;
};

struct CsvTable {
    std::string file;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<int> row_lines;  // 1-based source line per row

    // Index of a required column; throws CsvError naming the column.
    int column(const std::string& name) const;
    std::vector<std::string> comments;  // leading '#' lines, without the marker
};

// Reads a whole file; requires a header row; supports double-quoted fields.
CsvTable read_csv(const std::string& path);
CsvTable read_csv_string(const std::string& text, const std::string& name = "<string>");

std::string csv_escape(const std::string& field);

// Field accessors with file/line/column error reporting.
int parse_int_field(const CsvTable& t, std::size_t row, int col);
double parse_double_field(const CsvTable& t, std::size_t row, int col);

// Fixed, locale-independent float formatting so identical runs produce
// byte-identical artifacts.
std::string format_double(double v);

}  // namespace railsync
