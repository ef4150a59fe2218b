#pragma once

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ontask::csv {

// Splits one record into fields. Double-quoted fields may contain the
// delimiter; doubled quotes escape a quote. Records do not span lines.
std::vector<std::string> split_record(std::string_view line, char delimiter);

std::string format_field(std::string_view value, char delimiter);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::optional<std::size_t> column(std::string_view name) const;
};

// Reads a whole delimited-text table. Strips a UTF-8 BOM and trailing CR,
// skips blank lines.
Table read_table(std::istream& in, char delimiter);

Table read_table_file(const std::string& path, char delimiter);

}  // namespace ontask::csv
