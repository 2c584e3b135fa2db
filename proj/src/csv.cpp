#include "stakewatch/csv.hpp"

#include <charconv>
#include <sstream>

#include "stakewatch/errors.hpp"

namespace stakewatch {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    if (!out.empty() && !out.back().empty() && out.back().back() == '\r')
        out.back().pop_back();
    return out;
}

} // namespace

CsvReader::CsvReader(const std::string& path) : path_(path), in_(path) {
    if (!in_) throw IoError("cannot open CSV file: " + path);
    std::string header;
    if (!std::getline(in_, header)) throw DataError(path + ": missing header row");
    const auto names = split_line(header);
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (!columns_.emplace(names[i], i).second)
            throw DataError(path + ": duplicate column '" + names[i] + "'");
    }
}

bool CsvReader::next_row() {
    std::string line;
    while (std::getline(in_, line)) {
        ++line_;
        if (line.empty() || line == "\r") continue;
        fields_ = split_line(line);
        if (fields_.size() != columns_.size()) {
            std::ostringstream os;
            os << path_ << ":" << line_ << ": expected " << columns_.size()
               << " fields, got " << fields_.size();
            throw DataError(os.str());
        }
        return true;
    }
    return false;
}

bool CsvReader::has_column(const std::string& name) const {
    return columns_.count(name) != 0;
}

const std::string& CsvReader::raw(const std::string& column) const {
    const auto it = columns_.find(column);
    if (it == columns_.end())
        throw DataError(path_ + ": missing column '" + column + "'");
    return fields_[it->second];
}

void CsvReader::fail(const std::string& what, const std::string& column) const {
    std::ostringstream os;
    os << path_ << ":" << line_ << ": " << what << " in column '" << column << "'";
    throw DataError(os.str());
}

double CsvReader::number(const std::string& column) const {
    const std::string& s = raw(column);
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) fail("not a number: '" + s + "'", column);
    return v;
}

long long CsvReader::integer(const std::string& column) const {
    const std::string& s = raw(column);
    long long v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) fail("not an integer: '" + s + "'", column);
    return v;
}

bool CsvReader::flag01(const std::string& column) const {
    const std::string& s = raw(column);
    if (s == "0") return false;
    if (s == "1") return true;
    fail("expected 0 or 1, got '" + s + "'", column);
}

std::string format_double(double v) {
    char buf[32];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, p);
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path), path_(path), ncols_(header.size()) {
    if (!out_) throw IoError("cannot open for writing: " + path);
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out_ << ',';
        out_ << header[i];
    }
    out_ << '\n';
}

CsvWriter& CsvWriter::field(const std::string& s) {
    if (col_) out_ << ',';
    out_ << s;
    ++col_;
    return *this;
}

CsvWriter& CsvWriter::field(double v) { return field(format_double(v)); }

CsvWriter& CsvWriter::field(long long v) {
    char buf[24];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return field(std::string(buf, p));
}

void CsvWriter::end_row() {
    if (col_ != ncols_) throw IoError(path_ + ": row with wrong field count");
    out_ << '\n';
    col_ = 0;
}

void CsvWriter::close() {
    out_.flush();
    if (!out_) throw IoError("write failure: " + path_);
    out_.close();
}

} // namespace stakewatch
