#pragma once

// RFC-4180 CSV writing and reading. Doubles are written in the shortest form
// that reads back to the same value.

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace sdbc {

std::string format_double(double v);

/// Quotes a field if it contains a comma, quote, CR or LF.
std::string csv_escape(std::string_view field);

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    void row(const std::vector<std::string>& fields);

private:
    std::ostream& out_;
};

using CsvTable = std::vector<std::vector<std::string>>;

/// Throws std::runtime_error on an unterminated quoted field.
CsvTable read_csv(std::istream& in);

} // namespace sdbc
