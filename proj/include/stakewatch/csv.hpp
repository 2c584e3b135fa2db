#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

namespace stakewatch {

// Minimal CSV support for the fixed schemas used by this project: header row
// mandatory, comma separator, dot decimal separator, UTF-8, no quoting.

class CsvReader {
public:
    explicit CsvReader(const std::string& path);

    // Returns false at end of file. Field access afterwards refers to the
    // freshly read row.
    bool next_row();

    int line_number() const { return line_; }
    const std::string& path() const { return path_; }
    bool has_column(const std::string& name) const;

    const std::string& raw(const std::string& column) const;
    double number(const std::string& column) const;
    long long integer(const std::string& column) const;
    bool flag01(const std::string& column) const;  // strictly "0" or "1"

private:
    [[noreturn]] void fail(const std::string& what, const std::string& column) const;

    std::string path_;
    std::ifstream in_;
    std::unordered_map<std::string, std::size_t> columns_;
    std::vector<std::string> fields_;
    int line_ = 1;  // header is line 1
};

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);

    CsvWriter& field(const std::string& s);
    CsvWriter& field(double v);        // shortest round-trip representation
    CsvWriter& field(long long v);
    CsvWriter& field(int v) { return field(static_cast<long long>(v)); }
    void end_row();
    void close();

private:
    std::ofstream out_;
    std::string path_;
    std::size_t ncols_;
    std::size_t col_ = 0;
};

std::string format_double(double v);  // to_chars shortest form, locale-free

} // namespace stakewatch
