#pragma once

#include "mhc/bytes.hpp"

namespace mhc {

Hash32 sha256(BytesView data);

/// Keccak-256 with the original Keccak padding (as used by Ethereum),
/// not the NIST SHA-3 variant.
Hash32 keccak256(BytesView data);

}  // namespace mhc
