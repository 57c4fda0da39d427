#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace onebit {

// Shortest decimal form that round-trips the double. All CSV/SVG output goes
// through this so identical configs produce byte-identical files.
std::string fmt_double(double v);

std::string read_file(const std::string& path);                       // throws io_error
void write_file(const std::string& path, std::string_view contents);  // throws io_error

std::vector<std::string> split(std::string_view s, char sep);

}  // namespace onebit
