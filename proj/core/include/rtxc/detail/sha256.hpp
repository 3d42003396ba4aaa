#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rtxc::detail {

/// FIPS 180-4 SHA-256; used for manifest content hashes.
std::string sha256_hex(const unsigned char* data, size_t len);
std::string sha256_hex(const std::string& text);
std::string sha256_file_hex(const std::string& path);

}  // namespace rtxc::detail
