#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace dilemma {

/// Lowercase hex SHA-256 of the given bytes.
std::string sha256_hex(std::string_view bytes);

/// Decodes UTF-8 into Unicode scalar values. Invalid sequences decode to
/// U+FFFD one byte at a time, so decoding never fails.
std::u32string utf8_decode(std::string_view text);
std::string utf8_encode(std::u32string_view text);

/// 64-bit FNV-1a; stable across processes and platforms.
std::uint64_t fnv1a64(std::string_view bytes);

std::string_view trim(std::string_view s);

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temp file, then renames over the destination.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace dilemma
