#pragma once

#include <compare>

#include "mhc/bytes.hpp"
#include "mhc/errors.hpp"

namespace mhc {

enum class HashAlgorithm : uint8_t {
  Sha256 = 1,
  Keccak256 = 2,
};

const char* algorithm_name(HashAlgorithm algorithm);
std::optional<HashAlgorithm> algorithm_from_name(std::string_view name);
std::optional<HashAlgorithm> algorithm_from_id(uint8_t id);

/// Content-addressed digest of a document. Documents are opaque byte streams;
/// no canonicalization is applied, so byte identity is the contract.
struct Fingerprint {
  HashAlgorithm algorithm = HashAlgorithm::Sha256;
  Hash32 digest{};

  auto operator<=>(const Fingerprint&) const = default;

  /// Canonical text form "<algorithm>:<64 lowercase hex>".
  std::string text() const;
  static Fingerprint parse(std::string_view text);  // throws MalformedFingerprint
};

Fingerprint fingerprint_document(BytesView document, HashAlgorithm algorithm);
Fingerprint fingerprint_document(BytesView document, std::string_view algorithm_name);

/// True iff hashing the document under expected.algorithm reproduces
/// expected.digest. Never mutates state.
bool verify_fingerprint(BytesView document, const Fingerprint& expected);

}  // namespace mhc
