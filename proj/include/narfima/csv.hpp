#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace narfima::csv {

// Split one RFC-4180 record. Quoted fields may contain commas and doubled quotes;
// embedded newlines are not supported.
std::vector<std::string> split_record(std::string_view line);

// Quote a field when it contains a comma, quote, or line break.
std::string escape(std::string_view field);

// Shortest representation that round-trips to the same double.
std::string format_double(double value);

void write_record(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace narfima::csv
