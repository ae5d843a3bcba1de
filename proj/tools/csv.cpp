#include "csv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fwreg/error.hpp"

namespace fwreg::cli {

int Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

namespace {

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

Table parse_csv(const std::string& text, const std::string& source) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false, in_quotes = false, any = false;
    std::size_t line = 1;
    auto end_field = [&] {
        fields.push_back(field);
        field.clear();
        quoted = false;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(fields));
        fields.clear();
        any = false;
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field += c;
            }
            continue;
        }
        if (c == '"') {
            if (!field.empty() || quoted)
                raise(ErrorCode::parse, source + ": stray quote on line " + std::to_string(line));
            in_quotes = quoted = any = true;
        } else if (c == ',') {
            end_field();
            any = true;
        } else if (c == '\r') {
            continue;
        } else if (c == '\n') {
            if (any || !field.empty() || !fields.empty()) end_record();
            ++line;
        } else {
            if (quoted) raise(ErrorCode::parse, source + ": text after closing quote on line " + std::to_string(line));
            field += c;
            any = true;
        }
    }
    if (in_quotes) raise(ErrorCode::parse, source + ": unterminated quote");
    if (any || !field.empty() || !fields.empty()) end_record();
    if (records.empty()) raise(ErrorCode::parse, source + ": missing header row");

    Table t;
    t.header = std::move(records.front());
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != t.header.size())
            raise(ErrorCode::parse, source + ": data row " + std::to_string(r) + " has " +
                                        std::to_string(records[r].size()) + " fields, header has " +
                                        std::to_string(t.header.size()));
        t.rows.push_back(std::move(records[r]));
    }
    return t;
}

Table read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::io, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str(), path);
}

double parse_number(const std::string& cell, std::size_t row, const std::string& column) {
    std::size_t b = cell.find_first_not_of(" \t");
    std::size_t e = cell.find_last_not_of(" \t");
    std::string s = b == std::string::npos ? std::string() : cell.substr(b, e - b + 1);
    auto fail = [&] {
        raise(ErrorCode::parse, "row " + std::to_string(row) + " column '" + column + "': '" + cell +
                                    "' is not a number");
    };
    if (s.empty()) fail();
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) fail();
    return v;
}

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvBuilder::CsvBuilder(const std::vector<std::string>& header) {
    for (const auto& h : header) cell(h);
    end_row();
}

CsvBuilder& CsvBuilder::cell(const std::string& s) {
    if (row_open_) text_ += ',';
    text_ += quote(s);
    row_open_ = true;
    return *this;
}

CsvBuilder& CsvBuilder::cell(double v) { return cell(format_number(v)); }

CsvBuilder& CsvBuilder::cell(long long v) { return cell(std::to_string(v)); }

void CsvBuilder::end_row() {
    text_ += '\n';
    row_open_ = false;
}

void write_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    std::error_code ec;
    if (target.has_parent_path()) {
        fs::create_directories(target.parent_path(), ec);
        if (ec) raise(ErrorCode::io, "cannot create directory " + target.parent_path().string() + ": " + ec.message());
    }
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) raise(ErrorCode::io, "cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) raise(ErrorCode::io, "write to " + tmp.string() + " failed");
    }
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        raise(ErrorCode::io, "cannot rename onto " + path);
    }
}

}  // namespace fwreg::cli
