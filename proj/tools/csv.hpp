#pragma once

#include <string>
#include <vector>

namespace fwreg::cli {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Index of a header column, or -1.
    int column(const std::string& name) const;
};

// Comma separated, optional double quotes ("" escapes a quote), header row required.
Table read_csv(const std::string& path);
Table parse_csv(const std::string& text, const std::string& source);

// Throws a parse error naming the 1-based data row and the column.
double parse_number(const std::string& cell, std::size_t row, const std::string& column);

std::string format_number(double v);

class CsvBuilder {
public:
    explicit CsvBuilder(const std::vector<std::string>& header);
    CsvBuilder& cell(const std::string& s);
    CsvBuilder& cell(double v);
    CsvBuilder& cell(long long v);
    void end_row();
    const std::string& text() const { return text_; }

private:
    std::string text_;
    bool row_open_ = false;
};

// Writes to a temporary sibling and renames it over the target.
void write_atomic(const std::string& path, const std::string& content);

}  // namespace fwreg::cli
