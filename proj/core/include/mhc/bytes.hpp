#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mhc {

using Bytes = std::vector<uint8_t>;
using BytesView = std::span<const uint8_t>;

using Hash32 = std::array<uint8_t, 32>;

inline BytesView as_bytes(std::string_view s) {
  return {reinterpret_cast<const uint8_t*>(s.data()), s.size()};
}

std::string to_hex(BytesView data);
std::optional<Bytes> from_hex(std::string_view hex);

}  // namespace mhc
