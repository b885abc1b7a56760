#include "mhc/engine.hpp"

#include <algorithm>
#include <mutex>

namespace mhc {

const char* contract_state_name(ContractState state) {
  switch (state) {
    case ContractState::Pending: return "Pending";
    case ContractState::Active: return "Active";
    case ContractState::PendingDeactivation: return "PendingDeactivation";
    case ContractState::Deactivated: return "Deactivated";
  }
  return "Unknown";
}

bool ContractRecord::is_participant(const Address& address) const {
  return address == participants[0] || address == participants[1];
}

bool ContractRecord::has_signed(const Address& address) const {
  return std::find(signed_by.begin(), signed_by.end(), address) != signed_by.end();
}

bool ContractRecord::has_unsigned(const Address& address) const {
  return std::find(unsigned_by.begin(), unsigned_by.end(), address) !=
         unsigned_by.end();
}

Bytes ContractRecord::encode() const {
  Encoder enc;
  enc.u64(contract_id);
  put_address(enc, participants[0]);
  put_address(enc, participants[1]);
  put_address(enc, creator);
  put_fingerprint(enc, document_fingerprint);
  enc.u8(static_cast<uint8_t>(hash_method));
  enc.u32(static_cast<uint32_t>(signed_by.size()));
  for (const auto& a : signed_by) put_address(enc, a);
  enc.u32(static_cast<uint32_t>(unsigned_by.size()));
  for (const auto& a : unsigned_by) put_address(enc, a);
  enc.u8(static_cast<uint8_t>(state));
  return enc.take();
}

ContractRecord ContractRecord::decode(Decoder& dec) {
  ContractRecord rec;
  rec.contract_id = dec.u64();
  rec.participants[0] = get_address(dec);
  rec.participants[1] = get_address(dec);
  rec.creator = get_address(dec);
  rec.document_fingerprint = get_fingerprint(dec);
  auto method = algorithm_from_id(dec.u8());
  if (!method) {
    throw Error(ErrorCode::MalformedRecord, "unknown hash method in contract record");
  }
  rec.hash_method = *method;
  uint32_t signed_count = dec.u32();
  for (uint32_t i = 0; i < signed_count; ++i) rec.signed_by.push_back(get_address(dec));
  uint32_t unsigned_count = dec.u32();
  for (uint32_t i = 0; i < unsigned_count; ++i)
    rec.unsigned_by.push_back(get_address(dec));
  uint8_t state = dec.u8();
  if (state > static_cast<uint8_t>(ContractState::Deactivated)) {
    throw Error(ErrorCode::MalformedRecord, "unknown contract state");
  }
  rec.state = static_cast<ContractState>(state);
  return rec;
}

// -- engine ------------------------------------------------------------------

const ContractRecord& Engine::require_contract(ContractId contract_id) const {
  if (contract_id >= contracts_.size()) {
    throw Error(ErrorCode::UnknownContract,
                "no contract with id " + std::to_string(contract_id));
  }
  return contracts_[contract_id];
}

Ledger& Engine::require_ledger() const {
  if (ledger_ == nullptr) {
    throw Error(ErrorCode::IoError, "engine is not bound to a ledger");
  }
  return *ledger_;
}

TxRef Engine::submit(const KeyPair& caller, Payload payload) {
  Ledger& ledger = require_ledger();
  Address sender = derive_address(caller.public_key);
  Transaction tx =
      make_signed_transaction(caller, ledger.next_nonce(sender), std::move(payload));
  return ledger.submit_transaction(tx);
}

ContractId Engine::create_contract(const KeyPair& caller, const Address& counterparty,
                                   const Fingerprint& document_fingerprint) {
  TxRef ref = submit(caller, CreateContract{counterparty, document_fingerprint});
  // recover the assigned id from the creation event at this transaction
  for (const auto& event :
       require_ledger().events({}, EventKind::ContractCreated)) {
    if (event.tx_ref == ref) return event.contract_id;
  }
  throw Error(ErrorCode::UnknownContract, "creation event missing after submit");
}

ContractState Engine::create_contract_signature(const KeyPair& caller,
                                                ContractId contract_id) {
  submit(caller, SignContract{contract_id});
  return read_contract(contract_id).state;
}

TxRef Engine::create_contract_transfer(const KeyPair& caller, const Invoice& invoice) {
  return submit(caller, Transfer{invoice.contract_id, invoice.payer, invoice.payee,
                                 invoice.amount, invoice.invoice_fingerprint});
}

ContractState Engine::update_contract_unsign(const KeyPair& caller,
                                             ContractId contract_id) {
  submit(caller, Unsign{contract_id});
  return read_contract(contract_id).state;
}

ContractRecord Engine::read_contract(ContractId contract_id) const {
  std::shared_lock lock(mutex_);
  return require_contract(contract_id);
}

std::vector<ContractId> Engine::read_contract_ids(const Address& actor) const {
  std::shared_lock lock(mutex_);
  auto it = ids_by_actor_.find(actor);
  return it == ids_by_actor_.end() ? std::vector<ContractId>{} : it->second;
}

bool Engine::read_is_actor(const Address& actor, ContractId contract_id) const {
  std::shared_lock lock(mutex_);
  return require_contract(contract_id).is_participant(actor);
}

size_t Engine::contract_count() const {
  std::shared_lock lock(mutex_);
  return contracts_.size();
}

// -- validation --------------------------------------------------------------

void Engine::check_transaction(const AccountState& accounts,
                               const Transaction& tx) const {
  std::shared_lock lock(mutex_);
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, GenesisAllocation>) {
          throw Error(ErrorCode::InvalidPayload,
                      "genesis allocations are not contract operations");
        } else if constexpr (std::is_same_v<T, CreateContract>) {
          if (tx.sender == p.counterparty) {
            throw Error(ErrorCode::DuplicateParticipant,
                        "a contract needs two distinct participants");
          }
          if (!algorithm_from_id(static_cast<uint8_t>(p.document.algorithm))) {
            throw Error(ErrorCode::MalformedFingerprint,
                        "document fingerprint carries no valid hash method");
          }
        } else if constexpr (std::is_same_v<T, SignContract>) {
          const ContractRecord& rec = require_contract(p.contract_id);
          if (!rec.is_participant(tx.sender)) {
            throw Error(ErrorCode::NotParticipant,
                        tx.sender.to_hex() + " is not a participant of contract " +
                            std::to_string(p.contract_id));
          }
          if (rec.state != ContractState::Pending) {
            throw Error(ErrorCode::WrongState,
                        std::string("cannot sign a contract in state ") +
                            contract_state_name(rec.state));
          }
          if (rec.has_signed(tx.sender)) {
            throw Error(ErrorCode::AlreadySigned,
                        tx.sender.to_hex() + " already signed");
          }
        } else if constexpr (std::is_same_v<T, Transfer>) {
          const ContractRecord& rec = require_contract(p.contract_id);
          if (p.payer != tx.sender) {
            throw Error(ErrorCode::PayerMismatch,
                        "transfer must be signed by the invoice payer");
          }
          if (rec.state != ContractState::Active &&
              rec.state != ContractState::PendingDeactivation) {
            throw Error(ErrorCode::ContractNotActive,
                        std::string("contract is ") + contract_state_name(rec.state));
          }
          if (!rec.is_participant(p.payer) || !rec.is_participant(p.payee)) {
            throw Error(ErrorCode::NotParticipant,
                        "payer and payee must both be contract participants");
          }
          if (p.payer == p.payee) {
            throw Error(ErrorCode::SelfPayment, "payer and payee are the same");
          }
          if (p.amount == 0) {
            throw Error(ErrorCode::ZeroAmount, "invoice amount must be positive");
          }
          if (accounts.balance(p.payer) < p.amount) {
            throw Error(ErrorCode::InsufficientFunds,
                        p.payer.to_hex() + " holds " +
                            std::to_string(accounts.balance(p.payer)) + ", needs " +
                            std::to_string(p.amount));
          }
        } else if constexpr (std::is_same_v<T, Unsign>) {
          const ContractRecord& rec = require_contract(p.contract_id);
          if (!rec.is_participant(tx.sender)) {
            throw Error(ErrorCode::NotParticipant,
                        tx.sender.to_hex() + " is not a participant of contract " +
                            std::to_string(p.contract_id));
          }
          if (rec.state == ContractState::Pending ||
              rec.state == ContractState::Deactivated) {
            throw Error(ErrorCode::WrongState,
                        std::string("cannot unsign a contract in state ") +
                            contract_state_name(rec.state));
          }
          if (rec.has_unsigned(tx.sender)) {
            throw Error(ErrorCode::AlreadyUnsigned,
                        tx.sender.to_hex() + " already unsigned");
          }
        }
      },
      tx.payload);
}

std::vector<LedgerEvent> Engine::deliver_transaction(AccountState& accounts,
                                                     const Transaction& tx,
                                                     const TxRef& ref) {
  std::unique_lock lock(mutex_);
  std::vector<LedgerEvent> events;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, CreateContract>) {
          ContractRecord rec;
          rec.contract_id = contracts_.size();
          rec.participants = {tx.sender, p.counterparty};
          rec.creator = tx.sender;
          rec.document_fingerprint = p.document;
          rec.hash_method = p.document.algorithm;
          rec.signed_by = {tx.sender};  // the creating party also signs
          rec.state = ContractState::Pending;
          ids_by_actor_[tx.sender].push_back(rec.contract_id);
          ids_by_actor_[p.counterparty].push_back(rec.contract_id);

          events.push_back({EventKind::ContractCreated, rec.contract_id, tx.sender,
                            ref, CreateDetail{p.counterparty, p.document}});
          events.push_back({EventKind::ContractSigned, rec.contract_id, tx.sender,
                            ref, std::monostate{}});
          contracts_.push_back(std::move(rec));
        } else if constexpr (std::is_same_v<T, SignContract>) {
          ContractRecord& rec = contracts_[p.contract_id];
          rec.signed_by.push_back(tx.sender);
          // both parties have signed: the contract becomes active
          rec.state = ContractState::Active;
          events.push_back({EventKind::ContractSigned, rec.contract_id, tx.sender,
                            ref, std::monostate{}});
          events.push_back({EventKind::ContractActivated, rec.contract_id, tx.sender,
                            ref, std::monostate{}});
        } else if constexpr (std::is_same_v<T, Transfer>) {
          accounts.debit(p.payer, p.amount);
          accounts.credit(p.payee, p.amount);
          events.push_back(
              {EventKind::ContractTransfer, p.contract_id, tx.sender, ref,
               TransferDetail{p.payer, p.payee, p.amount, p.invoice}});
        } else if constexpr (std::is_same_v<T, Unsign>) {
          ContractRecord& rec = contracts_[p.contract_id];
          rec.unsigned_by.push_back(tx.sender);
          events.push_back({EventKind::ContractUnsigned, rec.contract_id, tx.sender,
                            ref, std::monostate{}});
          if (rec.unsigned_by.size() == rec.participants.size()) {
            // both parties have unsigned: the contract deactivates, terminally
            rec.state = ContractState::Deactivated;
            events.push_back({EventKind::ContractDeactivated, rec.contract_id,
                              tx.sender, ref, std::monostate{}});
          } else {
            rec.state = ContractState::PendingDeactivation;
          }
        }
      },
      tx.payload);
  return events;
}

}  // namespace mhc
