#pragma once

#include <compare>
#include <filesystem>

#include "mhc/bytes.hpp"
#include "mhc/errors.hpp"

namespace mhc {

inline constexpr size_t kSeedSize = 32;
inline constexpr size_t kPublicKeySize = 32;
inline constexpr size_t kSignatureSize = 64;
inline constexpr size_t kAddressSize = 20;

/// Signature scheme tags carried inside transactions.
inline constexpr uint8_t kSchemeNone = 0;  // genesis/system transactions only
inline constexpr uint8_t kSchemeEd25519 = 1;

struct PublicKey {
  std::array<uint8_t, kPublicKeySize> bytes{};

  auto operator<=>(const PublicKey&) const = default;
};

/// Ed25519 keypair. The seed is the private half; it is written only to
/// key-store files, never to the ledger or any event payload.
struct KeyPair {
  std::array<uint8_t, kSeedSize> seed{};
  PublicKey public_key;
};

/// 20-byte account identifier: the last 20 bytes of SHA-256(public key).
/// Canonical text form is 40 lowercase hex characters.
struct Address {
  std::array<uint8_t, kAddressSize> bytes{};

  auto operator<=>(const Address&) const = default;

  bool is_zero() const;
  std::string to_hex() const;
  static std::optional<Address> from_hex(std::string_view hex);
};

struct Signature {
  uint8_t scheme_id = kSchemeNone;
  Bytes bytes;

  auto operator<=>(const Signature&) const = default;
};

KeyPair generate_keypair();
KeyPair generate_keypair(BytesView seed);  // throws MalformedSeed on bad length

Address derive_address(const PublicKey& public_key);

Signature sign_message(const KeyPair& key_pair, BytesView message);
bool verify_signature(const PublicKey& public_key, BytesView message,
                      const Signature& signature);

/// Key-store file: magic "MHCK", version 0x01, 32-byte seed, 32-byte public
/// key. Written with owner-only permissions.
void save_keypair(const std::filesystem::path& path, const KeyPair& key_pair);
KeyPair load_keypair(const std::filesystem::path& path);

}  // namespace mhc
