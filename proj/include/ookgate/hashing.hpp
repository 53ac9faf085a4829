#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace ookgate {

// Incremental SHA-256, lowercase hex digest.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  Sha256& update(std::span<const std::byte> bytes);
  Sha256& update(std::string_view text);
  Sha256& update_u32(std::uint32_t value);  // little-endian
  std::string hex_digest();

 private:
  void* ctx_;
};

std::string sha256_hex(std::string_view text);

// 64-bit FNV-1a; used to derive deterministic seeds from text.
std::uint64_t fnv1a64(std::string_view text);

}  // namespace ookgate
