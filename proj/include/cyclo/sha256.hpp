#pragma once

#include <cstdint>
#include <string>

namespace cyclo {

// Hex digest of a byte string, for table/certificate integrity lines.
std::string sha256_hex(const std::string& data);

}  // namespace cyclo
