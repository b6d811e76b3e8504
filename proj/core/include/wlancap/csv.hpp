#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace wlancap {

/// Shortest decimal text that reads back to the same double; non-finite
/// values become "inf", "-inf" or "nan".
std::string format_number(double v);

/// Comma-separated output with a mandatory header row and LF line endings.
/// Cells containing commas, quotes or newlines are quoted.
class CsvWriter {
public:
    CsvWriter(std::ostream& out, std::vector<std::string> header);

    CsvWriter& cell(double v);
    CsvWriter& cell(std::int64_t v);
    CsvWriter& cell(int v) { return cell(static_cast<std::int64_t>(v)); }
    CsvWriter& cell(std::uint64_t v);
    CsvWriter& cell(bool v);
    CsvWriter& cell(std::string_view v);
    CsvWriter& cell(const char* v) { return cell(std::string_view(v)); }

    /// Ends the current row; throws if the cell count differs from the header.
    void end_row();

    std::size_t columns() const { return columns_; }

private:
    void raw(std::string_view text);

    std::ostream& out_;
    std::size_t columns_;
    std::size_t in_row_ = 0;
};

}  // namespace wlancap
