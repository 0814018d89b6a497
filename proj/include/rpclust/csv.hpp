#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace rpclust::csv {

using Row = std::vector<std::string>;

/// RFC 4180 reader: quoted fields may contain commas, doubled quotes and
/// newlines. A UTF-8 byte order mark at the start of the input is skipped.
/// Blank lines are dropped.
std::vector<Row> parse(std::string_view text);
std::vector<Row> read(std::istream& in);

/// Splits a single line; equivalent to parse() on one record.
Row parse_line(std::string_view line);

std::string escape(std::string_view field);
std::string format_row(const Row& row);
void write_row(std::ostream& out, const Row& row);

}  // namespace rpclust::csv
