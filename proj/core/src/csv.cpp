#include "edastress/csv.hpp"

#include "edastress/errors.hpp"

#include <cstdio>
#include <cstdlib>

namespace edastress::csv {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

double parse_double(const std::string& field, const std::string& context) {
    if (field.empty()) throw_data("empty numeric field in " + context);
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (end != field.c_str() + field.size()) {
        throw_data("non-numeric value '" + field + "' in " + context);
    }
    return v;
}

long parse_long(const std::string& field, const std::string& context) {
    if (field.empty()) throw_data("empty integer field in " + context);
    char* end = nullptr;
    const long v = std::strtol(field.c_str(), &end, 10);
    if (end != field.c_str() + field.size()) {
        throw_data("non-integer value '" + field + "' in " + context);
    }
    return v;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

} // namespace edastress::csv
