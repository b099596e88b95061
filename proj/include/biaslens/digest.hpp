#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace biaslens {

/// MurmurHash3 x86_32 over the raw bytes. Byte-order independent: blocks are
/// assembled little-endian regardless of host.
std::uint32_t murmur3_32(std::string_view data, std::uint32_t seed);

/// Lowercase hex SHA-256 of the bytes.
std::string sha256_hex(std::string_view data);

}  // namespace biaslens
