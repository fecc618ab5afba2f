#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace icsmon {

std::string sha256_hex(const uint8_t* data, size_t len);
std::string sha256_hex(const std::vector<uint8_t>& data);
std::string sha256_hex(const std::string& data);

/// Streaming digest of a file's bytes. Throws std::runtime_error when the
/// file cannot be opened.
std::string sha256_file(const std::string& path);

} // namespace icsmon
