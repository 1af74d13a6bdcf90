#include "railsync/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace railsync {

CsvError::CsvError(const std::string& file, int line, const std::string& what)
    : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
      file_(file),
      line_(line) {}

namespace {

std::vector<std::string> split_fields(const std::string& line, const std::string& file, int lineno) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) throw CsvError(file, lineno, "unterminated quoted field");
    fields.push_back(cur);
    return fields;
}

CsvTable read_csv_stream(std::istream& in, const std::string& name) {
    CsvTable t;
    t.file = name;
    std::string line;
    int lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            t.comments.push_back(line.substr(1));
            continue;
        }
        auto fields = split_fields(line, name, lineno);
        if (!have_header) {
            t.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != t.header.size()) {
            throw CsvError(name, lineno,
                           "expected " + std::to_string(t.header.size()) + " fields, got " +
                               std::to_string(fields.size()));
        }
        t.rows.push_back(std::move(fields));
        t.row_lines.push_back(lineno);
    }
    if (!have_header) throw CsvError(name, lineno, "missing header row");
    return t;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CsvError(path, 0, "cannot open file");
    return read_csv_stream(in, path);
}

CsvTable read_csv_string(const std::string& text, const std::string& name) {
    std::istringstream in(text);
    return read_csv_stream(in, name);
}

int CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    throw CsvError(file, 1, "missing required column '" + name + "'");
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

int parse_int_field(const CsvTable& t, std::size_t row, int col) {
    const std::string& s = t.rows[row][col];
    std::size_t pos = 0;
    int v = 0;
    try {
        v = std::stoi(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != s.size() || s.empty())
        throw CsvError(t.file, t.row_lines[row],
                       "column '" + t.header[col] + "': not an integer: '" + s + "'");
    return v;
}

double parse_double_field(const CsvTable& t, std::size_t row, int col) {
    const std::string& s = t.rows[row][col];
    std::size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != s.size() || s.empty())
        throw CsvError(t.file, t.row_lines[row],
                       "column '" + t.header[col] + "': not a number: '" + s + "'");
    return v;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

}  // namespace railsync
