#include "mhc/fingerprint.hpp"

#include "mhc/hash.hpp"

namespace mhc {

const char* algorithm_name(HashAlgorithm algorithm) {
  switch (algorithm) {
    case HashAlgorithm::Sha256: return "sha-256";
    case HashAlgorithm::Keccak256: return "keccak-256";
  }
  return "unknown";
}

std::optional<HashAlgorithm> algorithm_from_name(std::string_view name) {
  if (name == "sha-256") return HashAlgorithm::Sha256;
  if (name == "keccak-256") return HashAlgorithm::Keccak256;
  return std::nullopt;
}

std::optional<HashAlgorithm> algorithm_from_id(uint8_t id) {
  switch (id) {
    case static_cast<uint8_t>(HashAlgorithm::Sha256): return HashAlgorithm::Sha256;
    case static_cast<uint8_t>(HashAlgorithm::Keccak256): return HashAlgorithm::Keccak256;
    default: return std::nullopt;
  }
}

std::string Fingerprint::text() const {
  return std::string(algorithm_name(algorithm)) + ":" + to_hex(digest);
}

Fingerprint Fingerprint::parse(std::string_view text) {
  size_t colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorCode::MalformedFingerprint, "missing ':' separator");
  }
  auto algorithm = algorithm_from_name(text.substr(0, colon));
  if (!algorithm) {
    throw Error(ErrorCode::MalformedFingerprint,
                "unknown algorithm '" + std::string(text.substr(0, colon)) + "'");
  }
  std::string_view hex = text.substr(colon + 1);
  if (hex.size() != 64) {
    throw Error(ErrorCode::MalformedFingerprint, "digest must be 64 hex chars");
  }
  for (char c : hex) {
    // canonical form is lowercase only
    bool ok = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
    if (!ok) {
      throw Error(ErrorCode::MalformedFingerprint, "digest must be lowercase hex");
    }
  }
  auto raw = from_hex(hex);
  Fingerprint fp;
  fp.algorithm = *algorithm;
  std::copy(raw->begin(), raw->end(), fp.digest.begin());
  return fp;
}

Fingerprint fingerprint_document(BytesView document, HashAlgorithm algorithm) {
  Fingerprint fp;
  fp.algorithm = algorithm;
  switch (algorithm) {
    case HashAlgorithm::Sha256:
      fp.digest = sha256(document);
      return fp;
    case HashAlgorithm::Keccak256:
      fp.digest = keccak256(document);
      return fp;
  }
  throw Error(ErrorCode::UnsupportedAlgorithm,
              "unknown algorithm id " +
                  std::to_string(static_cast<unsigned>(algorithm)));
}

Fingerprint fingerprint_document(BytesView document, std::string_view algorithm_name) {
  auto algorithm = algorithm_from_name(algorithm_name);
  if (!algorithm) {
    throw Error(ErrorCode::UnsupportedAlgorithm,
                "unsupported hash method '" + std::string(algorithm_name) + "'");
  }
  return fingerprint_document(document, *algorithm);
}

bool verify_fingerprint(BytesView document, const Fingerprint& expected) {
  if (!algorithm_from_id(static_cast<uint8_t>(expected.algorithm))) {
    throw Error(ErrorCode::UnsupportedAlgorithm, "malformed expected fingerprint");
  }
  return fingerprint_document(document, expected.algorithm) == expected;
}

}  // namespace mhc
