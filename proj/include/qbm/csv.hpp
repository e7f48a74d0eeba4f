#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace qbm {

// Shortest decimal that parses back to the same double; "nan", "inf", "-inf".
std::string format_double(double x);
// Inverse of format_double; throws InvalidArgument on malformed input.
double parse_double(std::string_view s);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;
};

CsvTable read_csv(std::istream& in);
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace qbm
