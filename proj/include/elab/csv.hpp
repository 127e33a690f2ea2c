#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace elab {

/// Comma-separated table with a header row. Lines starting with '#' are
/// provenance comments and are skipped on read.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column index by name; throws elab::Error when absent.
    [[nodiscard]] std::size_t column(std::string_view name) const;
    [[nodiscard]] double number(std::size_t row, std::size_t col) const;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

std::vector<std::string> split(std::string_view text, char sep);
std::string trim(std::string_view text);

/// Quotes a field containing separators; quotes and backslashes are escaped with a backslash.
std::string csv_field(std::string_view text);
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

/// Shortest round-trippable text for a double ("nan"/"inf" for non-finite).
std::string format_number(double v);

}  // namespace elab
