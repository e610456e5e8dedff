#include "pdtune/checksum.hpp"

#include <cstdio>

namespace pdtune {

std::string Fnv1a64::hex() const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(hash_));
  return buf;
}

std::string checksum(std::string_view bytes) {
  Fnv1a64 h;
  h.update(bytes);
  return h.hex();
}

}  // namespace pdtune
