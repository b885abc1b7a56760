#pragma once

#include <stdexcept>
#include <string>

namespace mhc {

/// Rejection and failure reasons surfaced by the library. Validation errors
/// never leave partial state behind: a throwing operation is a no-op.
enum class ErrorCode {
  // identity
  MalformedSeed,
  MalformedKey,
  MalformedAddress,
  KeyNameExists,
  UnknownIdentity,

  // fingerprint
  UnsupportedAlgorithm,
  MalformedFingerprint,

  // ledger
  DuplicateGenesisAddress,
  SupplyOverflow,
  BadSignature,
  BadNonce,
  InvalidPayload,
  LedgerExists,
  LedgerLocked,
  MalformedRecord,

  // engine
  DuplicateParticipant,
  UnknownContract,
  NotParticipant,
  AlreadySigned,
  AlreadyUnsigned,
  WrongState,
  ContractNotActive,
  SelfPayment,
  ZeroAmount,
  InsufficientFunds,
  PayerMismatch,

  IoError,
};

const char* error_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mhc
