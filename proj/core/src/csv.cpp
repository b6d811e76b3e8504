#include "wlancap/csv.hpp"

#include <charconv>
#include <cmath>

#include "wlancap/error.hpp"

namespace wlancap {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::ostream& out, std::vector<std::string> header) : out_(out), columns_(header.size()) {
    if (header.empty()) throw InvalidArgument("CSV header must have at least one column");
    for (const auto& h : header) cell(std::string_view(h));
    end_row();
}

void CsvWriter::raw(std::string_view text) {
    if (in_row_ > 0) out_ << ',';
    out_ << text;
    ++in_row_;
}

CsvWriter& CsvWriter::cell(double v) {
    raw(format_number(v));
    return *this;
}

CsvWriter& CsvWriter::cell(std::int64_t v) {
    raw(std::to_string(v));
    return *this;
}

CsvWriter& CsvWriter::cell(std::uint64_t v) {
    raw(std::to_string(v));
    return *this;
}

CsvWriter& CsvWriter::cell(bool v) {
    raw(v ? "1" : "0");
    return *this;
}

CsvWriter& CsvWriter::cell(std::string_view v) {
    if (v.find_first_of(",\"\n\r") == std::string_view::npos) {
        raw(v);
        return *this;
    }
    std::string quoted = "\"";
    for (char c : v) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    quoted += '"';
    raw(quoted);
    return *this;
}

void CsvWriter::end_row() {
    if (in_row_ != columns_) {
        throw InvalidArgument("CSV row has " + std::to_string(in_row_) + " cells, header has " +
                              std::to_string(columns_));
    }
    out_ << '\n';
    in_row_ = 0;
}

}  // namespace wlancap
