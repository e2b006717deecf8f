#include "sdbc/csv.hpp"

#include <fmt/format.h>

#include <stdexcept>

namespace sdbc {

std::string format_double(double v) { return fmt::format("{}", v); }

std::string csv_escape(std::string_view field)
{
    if (field.find_first_of(",\"\r\n") == std::string_view::npos)
        return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"')
            out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void CsvWriter::row(const std::vector<std::string>& fields)
{
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i)
            out_ << ',';
        out_ << csv_escape(fields[i]);
    }
    out_ << "\r\n";
}

CsvTable read_csv(std::istream& in)
{
    CsvTable table;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool any = false;
    char c = 0;
    auto end_row = [&] {
        row.push_back(std::move(field));
        field.clear();
        table.push_back(std::move(row));
        row.clear();
        any = false;
    };
    while (in.get(c)) {
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    field += '"';
                }
                else {
                    quoted = false;
                }
            }
            else {
                field += c;
            }
            continue;
        }
        switch (c) {
        case '"': quoted = true; any = true; break;
        case ',': row.push_back(std::move(field)); field.clear(); any = true; break;
        case '\r':
            if (in.peek() == '\n')
                in.get(c);
            end_row();
            break;
        case '\n': end_row(); break;
        default: field += c; any = true; break;
        }
    }
    if (quoted)
        throw std::runtime_error("read_csv: unterminated quoted field");
    if (any || !row.empty())
        end_row();
    return table;
}

} // namespace sdbc
