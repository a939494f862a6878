#pragma once

#include <string>
#include <vector>

namespace edastress::csv {

// Splits one CSV line on commas. The project's file formats never quote
// fields, so no quote handling is needed.
std::vector<std::string> split(const std::string& line);

// Strict double parse; throws a data error naming `context` on failure.
double parse_double(const std::string& field, const std::string& context);

// Strict integer parse with the same error contract.
long parse_long(const std::string& field, const std::string& context);

// Shortest representation that round-trips through 12 significant digits.
// All numeric CSV output goes through this so reruns are byte-identical.
std::string format_double(double v);

} // namespace edastress::csv
