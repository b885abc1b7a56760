#include "mhc/identity.hpp"

#include <sodium.h>
#include <sys/stat.h>

#include <cstring>
#include <fstream>

#include "mhc/hash.hpp"

namespace mhc {

namespace {

constexpr char kKeyStoreMagic[4] = {'M', 'H', 'C', 'K'};
constexpr uint8_t kKeyStoreVersion = 0x01;

void ensure_sodium() {
  static const int rc = sodium_init();
  if (rc < 0) {
    throw Error(ErrorCode::IoError, "libsodium initialization failed");
  }
}

}  // namespace

bool Address::is_zero() const {
  for (uint8_t b : bytes) {
    if (b != 0) return false;
  }
  return true;
}

std::string Address::to_hex() const { return mhc::to_hex(bytes); }

std::optional<Address> Address::from_hex(std::string_view hex) {
  if (hex.size() != kAddressSize * 2) return std::nullopt;
  auto raw = mhc::from_hex(hex);
  if (!raw) return std::nullopt;
  Address out;
  std::copy(raw->begin(), raw->end(), out.bytes.begin());
  return out;
}

KeyPair generate_keypair() {
  ensure_sodium();
  std::array<uint8_t, kSeedSize> seed;
  randombytes_buf(seed.data(), seed.size());
  return generate_keypair(seed);
}

KeyPair generate_keypair(BytesView seed) {
  ensure_sodium();
  if (seed.size() != kSeedSize) {
    throw Error(ErrorCode::MalformedSeed,
                "seed must be " + std::to_string(kSeedSize) + " bytes, got " +
                    std::to_string(seed.size()));
  }
  KeyPair kp;
  std::copy(seed.begin(), seed.end(), kp.seed.begin());
  unsigned char sk[crypto_sign_SECRETKEYBYTES];
  crypto_sign_seed_keypair(kp.public_key.bytes.data(), sk, kp.seed.data());
  sodium_memzero(sk, sizeof sk);
  return kp;
}

Address derive_address(const PublicKey& public_key) {
  Hash32 digest = sha256(public_key.bytes);
  Address out;
  std::copy(digest.begin() + (digest.size() - kAddressSize), digest.end(),
            out.bytes.begin());
  return out;
}

Signature sign_message(const KeyPair& key_pair, BytesView message) {
  ensure_sodium();
  // libsodium wants the expanded secret key; rebuild it from the seed
  unsigned char pk[crypto_sign_PUBLICKEYBYTES];
  unsigned char sk[crypto_sign_SECRETKEYBYTES];
  crypto_sign_seed_keypair(pk, sk, key_pair.seed.data());

  Signature sig;
  sig.scheme_id = kSchemeEd25519;
  sig.bytes.resize(crypto_sign_BYTES);
  crypto_sign_detached(sig.bytes.data(), nullptr, message.data(), message.size(), sk);
  sodium_memzero(sk, sizeof sk);
  return sig;
}

bool verify_signature(const PublicKey& public_key, BytesView message,
                      const Signature& signature) {
  ensure_sodium();
  if (signature.scheme_id != kSchemeEd25519) return false;
  if (signature.bytes.size() != kSignatureSize) return false;
  return crypto_sign_verify_detached(signature.bytes.data(), message.data(),
                                     message.size(),
                                     public_key.bytes.data()) == 0;
}

void save_keypair(const std::filesystem::path& path, const KeyPair& key_pair) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot write key store file " + path.string());
  }
  out.write(kKeyStoreMagic, sizeof kKeyStoreMagic);
  out.put(static_cast<char>(kKeyStoreVersion));
  out.write(reinterpret_cast<const char*>(key_pair.seed.data()), kSeedSize);
  out.write(reinterpret_cast<const char*>(key_pair.public_key.bytes.data()),
            kPublicKeySize);
  out.flush();
  if (!out) {
    throw Error(ErrorCode::IoError, "short write to key store file " + path.string());
  }
  out.close();
  ::chmod(path.c_str(), S_IRUSR | S_IWUSR);  // seed material: owner-only
}

KeyPair load_keypair(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot read key store file " + path.string());
  }
  char magic[4];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kKeyStoreMagic, sizeof magic) != 0) {
    throw Error(ErrorCode::MalformedKey, "not a key store file: " + path.string());
  }
  int version = in.get();
  if (version != kKeyStoreVersion) {
    throw Error(ErrorCode::MalformedKey,
                "unsupported key store version " + std::to_string(version));
  }
  std::array<uint8_t, kSeedSize> seed;
  std::array<uint8_t, kPublicKeySize> stored_pub;
  in.read(reinterpret_cast<char*>(seed.data()), kSeedSize);
  in.read(reinterpret_cast<char*>(stored_pub.data()), kPublicKeySize);
  if (!in || in.peek() != EOF) {
    throw Error(ErrorCode::MalformedKey, "truncated or oversized key store file");
  }

  KeyPair kp = generate_keypair(seed);
  if (kp.public_key.bytes != stored_pub) {
    throw Error(ErrorCode::MalformedKey,
                "stored public key does not match the seed");
  }
  return kp;
}

}  // namespace mhc
