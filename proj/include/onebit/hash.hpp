#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace onebit {

// SHA-256 of a byte string, returned as lowercase hex. Used for the
// content hashes recorded in experiment manifests.
std::string sha256_hex(std::string_view bytes);

}  // namespace onebit
