#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace uhoi {

// 64-bit FNV-1a. Pinned so content hashes in manifests and transcripts are
// identical across platforms and builds.
constexpr std::uint64_t fnv1a64(std::string_view data,
                                std::uint64_t seed = 0xcbf29ce484222325ULL) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string to_hex(std::uint64_t value);

inline std::string content_hash(std::string_view data) {
  return to_hex(fnv1a64(data));
}

// Hash of a file's bytes; throws ParseError if the file cannot be read.
std::string file_hash(const std::string& path);

}  // namespace uhoi
