#pragma once

#include <shared_mutex>
#include <vector>

#include "mhc/ledger.hpp"

namespace mhc {

/// Contract lifecycle. The only reachable path is
/// Pending -> Active -> PendingDeactivation -> Deactivated, and Deactivated
/// is terminal.
enum class ContractState : uint8_t {
  Pending = 0,
  Active = 1,
  PendingDeactivation = 2,
  Deactivated = 3,
};

const char* contract_state_name(ContractState state);

/// On-ledger representation of a legal contract: two participants, the
/// document fingerprint linking to the off-chain legal document, and the
/// sign/unsign record driving the lifecycle state.
struct ContractRecord {
  ContractId contract_id = 0;
  std::array<Address, 2> participants{};  // [0] = creator, [1] = counterparty
  Address creator;
  Fingerprint document_fingerprint;
  HashAlgorithm hash_method = HashAlgorithm::Sha256;
  std::vector<Address> signed_by;    // creator always present
  std::vector<Address> unsigned_by;
  ContractState state = ContractState::Pending;

  bool operator==(const ContractRecord&) const = default;

  bool is_participant(const Address& address) const;
  bool has_signed(const Address& address) const;
  bool has_unsigned(const Address& address) const;

  Bytes encode() const;
  static ContractRecord decode(Decoder& dec);
};

/// Payment request: the invoice document's fingerprint is recorded alongside
/// the transfer, making the transfer self-receipting.
struct Invoice {
  ContractId contract_id = 0;
  Address payer;
  Address payee;
  Amount amount = 0;
  Fingerprint invoice_fingerprint;
};

/// The contract state machine. Registered as the ledger's payload validator;
/// every mutation flows through a signed transaction. The bound-ledger
/// convenience calls sign and submit on behalf of a caller's keypair.
///
/// Mutations happen only inside the ledger's single writer; reads take a
/// shared lock and return snapshots. contracts() returns a reference and
/// needs a quiescent engine.
class Engine final : public PayloadHandler {
 public:
  Engine() = default;
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  /// Binds the ledger the convenience operations submit through. The engine
  /// must be registered as that ledger's handler.
  void bind(Ledger& ledger) { ledger_ = &ledger; }

  // Contract operations; each submits one signed transaction.
  ContractId create_contract(const KeyPair& caller, const Address& counterparty,
                             const Fingerprint& document_fingerprint);
  ContractState create_contract_signature(const KeyPair& caller, ContractId contract_id);
  TxRef create_contract_transfer(const KeyPair& caller, const Invoice& invoice);
  ContractState update_contract_unsign(const KeyPair& caller, ContractId contract_id);

  // Read-only queries.
  ContractRecord read_contract(ContractId contract_id) const;  // throws UnknownContract
  std::vector<ContractId> read_contract_ids(const Address& actor) const;
  bool read_is_actor(const Address& actor, ContractId contract_id) const;
  size_t contract_count() const;
  const std::vector<ContractRecord>& contracts() const { return contracts_; }

  // PayloadHandler: transaction validation and application.
  void check_transaction(const AccountState& accounts,
                         const Transaction& tx) const override;
  std::vector<LedgerEvent> deliver_transaction(AccountState& accounts,
                                               const Transaction& tx,
                                               const TxRef& ref) override;

 private:
  const ContractRecord& require_contract(ContractId contract_id) const;
  Ledger& require_ledger() const;
  TxRef submit(const KeyPair& caller, Payload payload);

  Ledger* ledger_ = nullptr;
  mutable std::shared_mutex mutex_;
  std::vector<ContractRecord> contracts_;
  std::map<Address, std::vector<ContractId>> ids_by_actor_;
};

}  // namespace mhc
