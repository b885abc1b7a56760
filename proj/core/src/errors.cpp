#include "mhc/errors.hpp"

namespace mhc {

const char* error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedSeed: return "MalformedSeed";
    case ErrorCode::MalformedKey: return "MalformedKey";
    case ErrorCode::MalformedAddress: return "MalformedAddress";
    case ErrorCode::KeyNameExists: return "KeyNameExists";
    case ErrorCode::UnknownIdentity: return "UnknownIdentity";
    case ErrorCode::UnsupportedAlgorithm: return "UnsupportedAlgorithm";
    case ErrorCode::MalformedFingerprint: return "MalformedFingerprint";
    case ErrorCode::DuplicateGenesisAddress: return "DuplicateGenesisAddress";
    case ErrorCode::SupplyOverflow: return "SupplyOverflow";
    case ErrorCode::BadSignature: return "BadSignature";
    case ErrorCode::BadNonce: return "BadNonce";
    case ErrorCode::InvalidPayload: return "InvalidPayload";
    case ErrorCode::LedgerExists: return "LedgerExists";
    case ErrorCode::LedgerLocked: return "LedgerLocked";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::DuplicateParticipant: return "DuplicateParticipant";
    case ErrorCode::UnknownContract: return "UnknownContract";
    case ErrorCode::NotParticipant: return "NotParticipant";
    case ErrorCode::AlreadySigned: return "AlreadySigned";
    case ErrorCode::AlreadyUnsigned: return "AlreadyUnsigned";
    case ErrorCode::WrongState: return "WrongState";
    case ErrorCode::ContractNotActive: return "ContractNotActive";
    case ErrorCode::SelfPayment: return "SelfPayment";
    case ErrorCode::ZeroAmount: return "ZeroAmount";
    case ErrorCode::InsufficientFunds: return "InsufficientFunds";
    case ErrorCode::PayerMismatch: return "PayerMismatch";
    case ErrorCode::IoError: return "IoError";
  }
  return "UnknownError";
}

}  // namespace mhc
