#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace pdtune {

/// 64-bit FNV-1a, incremental.
class Fnv1a64 {
public:
  void update(std::string_view bytes) {
    for (const unsigned char c : bytes) {
      hash_ ^= c;
      hash_ *= 0x100000001b3ULL;
    }
  }
  [[nodiscard]] std::uint64_t value() const { return hash_; }
  /// "fnv1a64:" followed by 16 lowercase hex digits.
  [[nodiscard]] std::string hex() const;

private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

std::string checksum(std::string_view bytes);

}  // namespace pdtune
