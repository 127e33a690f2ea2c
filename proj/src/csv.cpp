#include "elab/csv.hpp"

#include "elab/errors.hpp"

#include <boost/tokenizer.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace elab {

std::size_t CsvTable::column(std::string_view name) const
{
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw Error("CSV has no column '" + std::string(name) + "'");
}

double CsvTable::number(std::size_t row, std::size_t col) const
{
    const auto& cells = rows.at(row);
    if (col >= cells.size()) {
        throw Error("CSV row " + std::to_string(row + 2) + " is missing column " + std::to_string(col + 1));
    }
    try {
        std::size_t used = 0;
        const double v = std::stod(cells[col], &used);
        if (used != cells[col].size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw Error("CSV row " + std::to_string(row + 2) + ": '" + cells[col] + "' is not a number");
    }
}

std::vector<std::string> split(std::string_view text, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(sep, start);
        out.push_back(trim(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string trim(std::string_view text)
{
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = text.find_last_not_of(" \t\r\n");
    return std::string(text.substr(first, last - first + 1));
}

namespace {

std::vector<std::string> split_record(const std::string& line)
{
    using Separator = boost::escaped_list_separator<char>;
    const boost::tokenizer<Separator> tok(line, Separator('\\', ',', '"'));
    std::vector<std::string> out;
    for (const auto& field : tok) out.push_back(trim(field));
    return out;
}

}  // namespace

CsvTable read_csv(std::istream& in)
{
    CsvTable t;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        const std::string s = trim(line);
        if (s.empty() || s.front() == '#') continue;
        if (!have_header) {
            t.header = split_record(s);
            have_header = true;
        } else {
            t.rows.push_back(split_record(s));
        }
    }
    if (!have_header) throw Error("CSV input is empty");
    return t;
}

CsvTable read_csv_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    return read_csv(in);
}

std::string csv_field(std::string_view text)
{
    if (text.find_first_of(",\"\\\n") == std::string_view::npos) return std::string(text);
    std::string out = "\"";
    for (char c : text) {
        if (c == '"' || c == '\\') out += '\\';
        out += c == '\n' ? ' ' : c;
    }
    return out + '"';
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields)
{
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) out << ',';
        out << csv_field(fields[i]);
    }
    out << '\n';
}

std::string format_number(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace elab
