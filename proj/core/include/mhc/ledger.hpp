#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <shared_mutex>
#include <variant>
#include <vector>

#include "mhc/bytes.hpp"
#include "mhc/codec.hpp"
#include "mhc/errors.hpp"
#include "mhc/fingerprint.hpp"
#include "mhc/identity.hpp"

namespace mhc {

using Amount = uint64_t;
using ContractId = uint64_t;

/// Position of a transaction on the chain.
struct TxRef {
  uint64_t height = 0;
  uint32_t index = 0;

  auto operator<=>(const TxRef&) const = default;
};

// Wire helpers shared by everything that encodes domain values canonically.
void put_address(Encoder& enc, const Address& address);
Address get_address(Decoder& dec);
void put_fingerprint(Encoder& enc, const Fingerprint& fp);
Fingerprint get_fingerprint(Decoder& dec);
void put_tx_ref(Encoder& enc, const TxRef& ref);
TxRef get_tx_ref(Decoder& dec);

// -- transaction payloads ----------------------------------------------------

/// Genesis-only system payload crediting an account. Rejected anywhere else.
struct GenesisAllocation {
  Address beneficiary;
  Amount amount = 0;

  auto operator<=>(const GenesisAllocation&) const = default;
};

struct CreateContract {
  Address counterparty;
  Fingerprint document;

  auto operator<=>(const CreateContract&) const = default;
};

struct SignContract {
  ContractId contract_id = 0;

  auto operator<=>(const SignContract&) const = default;
};

struct Transfer {
  ContractId contract_id = 0;
  Address payer;
  Address payee;
  Amount amount = 0;
  Fingerprint invoice;

  auto operator<=>(const Transfer&) const = default;
};

struct Unsign {
  ContractId contract_id = 0;

  auto operator<=>(const Unsign&) const = default;
};

using Payload =
    std::variant<GenesisAllocation, CreateContract, SignContract, Transfer, Unsign>;

/// Signed ledger mutation. The signature covers the canonical encoding of
/// (nonce, sender, payload); the carried public key must derive to sender.
struct Transaction {
  uint64_t nonce = 0;
  Address sender;
  Payload payload;
  Bytes public_key;     // empty for genesis/system transactions
  Signature signature;  // kSchemeNone for genesis/system transactions

  bool operator==(const Transaction&) const = default;

  Bytes signing_bytes() const;
  Bytes encode() const;
  static Transaction decode(BytesView data);
};

Transaction make_signed_transaction(const KeyPair& key_pair, uint64_t nonce,
                                    Payload payload);

// -- blocks ------------------------------------------------------------------

struct Block {
  uint64_t height = 0;
  uint64_t timestamp = 0;
  Hash32 prev_hash{};
  std::vector<Transaction> transactions;
  Hash32 block_hash{};

  bool operator==(const Block&) const = default;

  /// SHA-256 over the canonical encoding of (height, timestamp, prev_hash,
  /// transactions).
  Hash32 compute_hash() const;
  Bytes encode() const;  // hashed fields followed by the stored block hash
  static Block decode(BytesView data);
};

// -- events ------------------------------------------------------------------

enum class EventKind : uint8_t {
  ContractCreated = 1,
  ContractSigned = 2,
  ContractActivated = 3,
  ContractTransfer = 4,
  ContractUnsigned = 5,
  ContractDeactivated = 6,
};

const char* event_kind_name(EventKind kind);

struct CreateDetail {
  Address counterparty;
  Fingerprint document;

  auto operator<=>(const CreateDetail&) const = default;
};

struct TransferDetail {
  Address sender;
  Address receiver;
  Amount amount = 0;
  Fingerprint invoice;

  auto operator<=>(const TransferDetail&) const = default;
};

using EventDetail = std::variant<std::monostate, CreateDetail, TransferDetail>;

/// Append-only audit record emitted per contract state change, linked to the
/// transaction that caused it.
struct LedgerEvent {
  EventKind kind = EventKind::ContractCreated;
  ContractId contract_id = 0;
  Address actor;
  TxRef tx_ref;
  EventDetail detail;  // CreateDetail for Created, TransferDetail for Transfer

  bool operator==(const LedgerEvent&) const = default;

  Bytes encode() const;
  static LedgerEvent decode(Decoder& dec);
};

// -- account state -----------------------------------------------------------

/// Balances in the smallest currency unit. Transfers only move value, so the
/// sum of all balances equals the genesis allocation total at every height.
class AccountState {
 public:
  Amount balance(const Address& address) const;  // unknown address -> 0
  Amount total_supply() const;

  void credit(const Address& address, Amount amount);  // throws SupplyOverflow
  void debit(const Address& address, Amount amount);   // throws InsufficientFunds

  const std::map<Address, Amount>& balances() const { return balances_; }
  bool operator==(const AccountState&) const = default;

 private:
  std::map<Address, Amount> balances_;
};

// -- ledger ------------------------------------------------------------------

enum class ClockMode : uint8_t {
  Wall = 0,     // seconds since epoch at sealing time
  Logical = 1,  // timestamp equals block height; reproducible ledgers
};

/// Payload semantics are owned by the validator registered at ledger
/// construction (the contract engine). The ledger itself owns ordering,
/// signatures and nonces.
class PayloadHandler {
 public:
  virtual ~PayloadHandler() = default;

  /// Validate a transaction against current state; throw Error to reject.
  virtual void check_transaction(const AccountState& accounts,
                                 const Transaction& tx) const = 0;

  /// Apply a checked transaction and return the emitted events. Must succeed
  /// for any transaction that passed check_transaction with no intervening
  /// state change.
  virtual std::vector<LedgerEvent> deliver_transaction(AccountState& accounts,
                                                       const Transaction& tx,
                                                       const TxRef& ref) = 0;
};

struct VerificationReport {
  bool ok = false;
  uint64_t blocks_checked = 0;
  uint64_t failing_height = 0;  // meaningful when !ok
  std::string reason;           // empty when ok
  bool state_match = true;      // live instance state equals file replay
};

/// Embedded stand-in for the public blockchain: an append-only, hash-chained
/// block file with one sealed block per accepted transaction. Submissions are
/// all-or-nothing; a rejected transaction changes neither the file, the event
/// log nor any balance.
///
/// Concurrency: submissions from concurrent callers are serialized by an
/// internal writer lock. The value-returning reads (balance, events,
/// next_nonce, verify_chain) take a shared lock and observe a sealed-block
/// prefix. blocks()/tip() return references and need a quiescent ledger.
class Ledger {
 public:
  Ledger(Ledger&&) = default;
  Ledger(const Ledger&) = delete;
  Ledger& operator=(const Ledger&) = delete;

  /// Seals the genesis block at height 0 from the given allocations and
  /// creates the backing file. Fails if the file already exists.
  static Ledger create(const std::filesystem::path& path,
                       const std::vector<GenesisAllocation>& genesis,
                       ClockMode clock_mode, PayloadHandler& handler);

  /// Replays an existing ledger file, rebuilding balances, the event log and
  /// the handler's state. Validates every block on the way in.
  static Ledger open(const std::filesystem::path& path, PayloadHandler& handler);

  /// Validates, seals into a new block, persists, applies. Throws on
  /// rejection, leaving all observable state unchanged.
  TxRef submit_transaction(const Transaction& tx);

  const std::vector<Block>& blocks() const { return blocks_; }
  const Block& tip() const { return blocks_.back(); }
  uint64_t next_nonce(const Address& sender) const;

  Amount balance(const Address& address) const;
  Amount total_supply() const;
  const AccountState& accounts() const { return accounts_; }
  AccountState accounts_snapshot() const;

  /// Events in ledger order, optionally filtered by contract and kind.
  std::vector<LedgerEvent> events(std::optional<ContractId> contract_id = {},
                                  std::optional<EventKind> kind = {}) const;

  ClockMode clock_mode() const { return clock_mode_; }
  const std::filesystem::path& path() const { return path_; }

  /// Re-reads the backing file from disk, recomputes every hash, link,
  /// signature and balance, and compares the result with this instance.
  /// Failures are report contents, never exceptions.
  VerificationReport verify_chain(PayloadHandler& fresh_handler) const;

  /// Standalone file verification; fresh_handler must be an empty validator.
  static VerificationReport verify_file(const std::filesystem::path& path,
                                        PayloadHandler& fresh_handler);

  /// Human-readable companion export: one JSON object per line per block.
  /// The binary file stays authoritative.
  void export_jsonl(const std::filesystem::path& out_path) const;

 private:
  struct FileLock;
  Ledger(std::filesystem::path path, ClockMode clock_mode, PayloadHandler& handler);

  uint64_t now() const;
  void append_block_to_file(const Block& block);
  void apply_block(const Block& block);  // in-memory bookkeeping after persist

  std::filesystem::path path_;
  ClockMode clock_mode_;
  PayloadHandler* handler_;
  std::shared_ptr<FileLock> lock_;
  std::unique_ptr<std::shared_mutex> mutex_ = std::make_unique<std::shared_mutex>();

  std::vector<Block> blocks_;
  std::vector<LedgerEvent> events_;
  AccountState accounts_;
  std::map<Address, uint64_t> next_nonce_;
};

}  // namespace mhc
