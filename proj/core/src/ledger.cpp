#include "mhc/ledger.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <chrono>
#include <cstring>
#include <fstream>
#include <mutex>

#include <nlohmann/json.hpp>

#include "mhc/hash.hpp"

namespace mhc {

namespace {

constexpr char kLedgerMagic[4] = {'M', 'H', 'C', 'L'};
constexpr uint8_t kLedgerVersion = 0x01;
// magic + version + flags + sha256(magic|version|flags)
constexpr size_t kHeaderSize = 4 + 1 + 1 + 32;

Bytes make_header(ClockMode mode) {
  Bytes header(kLedgerMagic, kLedgerMagic + 4);
  header.push_back(kLedgerVersion);
  header.push_back(static_cast<uint8_t>(mode));
  Hash32 digest = sha256(header);
  header.insert(header.end(), digest.begin(), digest.end());
  return header;
}

const Address kSystemSender{};  // zero address; genesis allocations only

}  // namespace

// -- wire helpers --------------------------------------------------------

void put_address(Encoder& enc, const Address& address) { enc.raw(address.bytes); }

Address get_address(Decoder& dec) {
  Address out;
  dec.raw(out.bytes);
  return out;
}

void put_fingerprint(Encoder& enc, const Fingerprint& fp) {
  enc.u8(static_cast<uint8_t>(fp.algorithm));
  enc.raw(fp.digest);
}

Fingerprint get_fingerprint(Decoder& dec) {
  uint8_t id = dec.u8();
  auto algorithm = algorithm_from_id(id);
  if (!algorithm) {
    throw Error(ErrorCode::MalformedRecord,
                "unknown fingerprint algorithm id " + std::to_string(id));
  }
  Fingerprint fp;
  fp.algorithm = *algorithm;
  dec.raw(fp.digest);
  return fp;
}

void put_tx_ref(Encoder& enc, const TxRef& ref) {
  enc.u64(ref.height);
  enc.u32(ref.index);
}

TxRef get_tx_ref(Decoder& dec) {
  TxRef ref;
  ref.height = dec.u64();
  ref.index = dec.u32();
  return ref;
}

// -- transactions ----------------------------------------------------------

namespace {

void put_payload(Encoder& enc, const Payload& payload) {
  enc.u8(static_cast<uint8_t>(payload.index()));
  std::visit(
      [&enc](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, GenesisAllocation>) {
          put_address(enc, p.beneficiary);
          enc.u64(p.amount);
        } else if constexpr (std::is_same_v<T, CreateContract>) {
          put_address(enc, p.counterparty);
          put_fingerprint(enc, p.document);
        } else if constexpr (std::is_same_v<T, SignContract>) {
          enc.u64(p.contract_id);
        } else if constexpr (std::is_same_v<T, Transfer>) {
          enc.u64(p.contract_id);
          put_address(enc, p.payer);
          put_address(enc, p.payee);
          enc.u64(p.amount);
          put_fingerprint(enc, p.invoice);
        } else if constexpr (std::is_same_v<T, Unsign>) {
          enc.u64(p.contract_id);
        }
      },
      payload);
}

Payload get_payload(Decoder& dec) {
  uint8_t kind = dec.u8();
  switch (kind) {
    case 0: {
      GenesisAllocation p;
      p.beneficiary = get_address(dec);
      p.amount = dec.u64();
      return p;
    }
    case 1: {
      CreateContract p;
      p.counterparty = get_address(dec);
      p.document = get_fingerprint(dec);
      return p;
    }
    case 2: {
      SignContract p;
      p.contract_id = dec.u64();
      return p;
    }
    case 3: {
      Transfer p;
      p.contract_id = dec.u64();
      p.payer = get_address(dec);
      p.payee = get_address(dec);
      p.amount = dec.u64();
      p.invoice = get_fingerprint(dec);
      return p;
    }
    case 4: {
      Unsign p;
      p.contract_id = dec.u64();
      return p;
    }
    default:
      throw Error(ErrorCode::MalformedRecord,
                  "unknown payload kind " + std::to_string(kind));
  }
}

}  // namespace

Bytes Transaction::signing_bytes() const {
  Encoder enc;
  enc.u64(nonce);
  put_address(enc, sender);
  put_payload(enc, payload);
  return enc.take();
}

Bytes Transaction::encode() const {
  Encoder enc;
  enc.u64(nonce);
  put_address(enc, sender);
  put_payload(enc, payload);
  enc.bytes(public_key);
  enc.u8(signature.scheme_id);
  enc.bytes(signature.bytes);
  return enc.take();
}

Transaction Transaction::decode(BytesView data) {
  Decoder dec(data);
  Transaction tx;
  tx.nonce = dec.u64();
  tx.sender = get_address(dec);
  tx.payload = get_payload(dec);
  tx.public_key = dec.bytes();
  tx.signature.scheme_id = dec.u8();
  tx.signature.bytes = dec.bytes();
  dec.expect_done();
  return tx;
}

Transaction make_signed_transaction(const KeyPair& key_pair, uint64_t nonce,
                                    Payload payload) {
  Transaction tx;
  tx.nonce = nonce;
  tx.sender = derive_address(key_pair.public_key);
  tx.payload = std::move(payload);
  tx.public_key.assign(key_pair.public_key.bytes.begin(),
                       key_pair.public_key.bytes.end());
  tx.signature = sign_message(key_pair, tx.signing_bytes());
  return tx;
}

// -- blocks ------------------------------------------------------------------

namespace {

Bytes block_hashed_bytes(const Block& block) {
  Encoder enc;
  enc.u64(block.height);
  enc.u64(block.timestamp);
  enc.raw(block.prev_hash);
  enc.u32(static_cast<uint32_t>(block.transactions.size()));
  for (const auto& tx : block.transactions) {
    enc.bytes(tx.encode());
  }
  return enc.take();
}

}  // namespace

Hash32 Block::compute_hash() const { return sha256(block_hashed_bytes(*this)); }

Bytes Block::encode() const {
  Bytes out = block_hashed_bytes(*this);
  out.insert(out.end(), block_hash.begin(), block_hash.end());
  return out;
}

Block Block::decode(BytesView data) {
  Decoder dec(data);
  Block block;
  block.height = dec.u64();
  block.timestamp = dec.u64();
  dec.raw(block.prev_hash);
  // the count is untrusted input: no up-front reserve, every element read is
  // bounds-checked against the remaining record bytes
  uint32_t count = dec.u32();
  for (uint32_t i = 0; i < count; ++i) {
    Bytes tx_bytes = dec.bytes();
    block.transactions.push_back(Transaction::decode(tx_bytes));
  }
  dec.raw(block.block_hash);
  dec.expect_done();
  return block;
}

// -- events --------------------------------------------------------------

const char* event_kind_name(EventKind kind) {
  switch (kind) {
    case EventKind::ContractCreated: return "ContractCreated";
    case EventKind::ContractSigned: return "ContractSigned";
    case EventKind::ContractActivated: return "ContractActivated";
    case EventKind::ContractTransfer: return "ContractTransfer";
    case EventKind::ContractUnsigned: return "ContractUnsigned";
    case EventKind::ContractDeactivated: return "ContractDeactivated";
  }
  return "Unknown";
}

Bytes LedgerEvent::encode() const {
  Encoder enc;
  enc.u8(static_cast<uint8_t>(kind));
  enc.u64(contract_id);
  put_address(enc, actor);
  put_tx_ref(enc, tx_ref);
  if (kind == EventKind::ContractCreated) {
    const auto& d = std::get<CreateDetail>(detail);
    put_address(enc, d.counterparty);
    put_fingerprint(enc, d.document);
  } else if (kind == EventKind::ContractTransfer) {
    const auto& d = std::get<TransferDetail>(detail);
    put_address(enc, d.sender);
    put_address(enc, d.receiver);
    enc.u64(d.amount);
    put_fingerprint(enc, d.invoice);
  }
  return enc.take();
}

LedgerEvent LedgerEvent::decode(Decoder& dec) {
  LedgerEvent ev;
  uint8_t kind = dec.u8();
  if (kind < 1 || kind > 6) {
    throw Error(ErrorCode::MalformedRecord,
                "unknown event kind " + std::to_string(kind));
  }
  ev.kind = static_cast<EventKind>(kind);
  ev.contract_id = dec.u64();
  ev.actor = get_address(dec);
  ev.tx_ref = get_tx_ref(dec);
  if (ev.kind == EventKind::ContractCreated) {
    CreateDetail d;
    d.counterparty = get_address(dec);
    d.document = get_fingerprint(dec);
    ev.detail = d;
  } else if (ev.kind == EventKind::ContractTransfer) {
    TransferDetail d;
    d.sender = get_address(dec);
    d.receiver = get_address(dec);
    d.amount = dec.u64();
    d.invoice = get_fingerprint(dec);
    ev.detail = d;
  }
  return ev;
}

// -- account state ---------------------------------------------------------

Amount AccountState::balance(const Address& address) const {
  auto it = balances_.find(address);
  return it == balances_.end() ? 0 : it->second;
}

Amount AccountState::total_supply() const {
  Amount total = 0;
  for (const auto& [addr, amount] : balances_) {
    if (total + amount < total) {
      throw Error(ErrorCode::SupplyOverflow, "total supply exceeds 2^64-1");
    }
    total += amount;
  }
  return total;
}

void AccountState::credit(const Address& address, Amount amount) {
  Amount& balance = balances_[address];
  if (balance + amount < balance) {
    throw Error(ErrorCode::SupplyOverflow,
                "credit overflows balance of " + address.to_hex());
  }
  balance += amount;
}

void AccountState::debit(const Address& address, Amount amount) {
  auto it = balances_.find(address);
  Amount balance = it == balances_.end() ? 0 : it->second;
  if (balance < amount) {
    throw Error(ErrorCode::InsufficientFunds,
                address.to_hex() + " holds " + std::to_string(balance) +
                    ", needs " + std::to_string(amount));
  }
  if (it != balances_.end()) {
    it->second = balance - amount;
  }
}

// -- ledger ----------------------------------------------------------------

struct Ledger::FileLock {
  int fd = -1;
  std::filesystem::path lock_path;

  explicit FileLock(const std::filesystem::path& ledger_path)
      : lock_path(ledger_path.string() + ".lock") {
    fd = ::open(lock_path.c_str(), O_CREAT | O_RDWR, 0644);
    if (fd < 0) {
      throw Error(ErrorCode::IoError, "cannot open lock file " + lock_path.string());
    }
    if (::flock(fd, LOCK_EX | LOCK_NB) != 0) {
      ::close(fd);
      fd = -1;
      throw Error(ErrorCode::LedgerLocked,
                  "ledger is locked by another process: " + lock_path.string());
    }
  }

  ~FileLock() {
    if (fd >= 0) {
      ::flock(fd, LOCK_UN);
      ::close(fd);
    }
  }
};

Ledger::Ledger(std::filesystem::path path, ClockMode clock_mode,
               PayloadHandler& handler)
    : path_(std::move(path)), clock_mode_(clock_mode), handler_(&handler) {}

uint64_t Ledger::now() const {
  if (clock_mode_ == ClockMode::Logical) {
    return blocks_.size();  // next height
  }
  return static_cast<uint64_t>(std::chrono::duration_cast<std::chrono::seconds>(
                                   std::chrono::system_clock::now().time_since_epoch())
                                   .count());
}

Ledger Ledger::create(const std::filesystem::path& path,
                      const std::vector<GenesisAllocation>& genesis,
                      ClockMode clock_mode, PayloadHandler& handler) {
  if (std::filesystem::exists(path)) {
    throw Error(ErrorCode::LedgerExists, "ledger file already exists: " + path.string());
  }

  // Stage balances first so a bad genesis never leaves a file behind.
  AccountState accounts;
  Amount supply = 0;
  for (const auto& allocation : genesis) {
    if (allocation.beneficiary.is_zero()) {
      throw Error(ErrorCode::MalformedAddress,
                  "the zero address is reserved for the system");
    }
    if (accounts.balances().contains(allocation.beneficiary)) {
      throw Error(ErrorCode::DuplicateGenesisAddress,
                  "duplicate genesis address " + allocation.beneficiary.to_hex());
    }
    if (supply + allocation.amount < supply) {
      throw Error(ErrorCode::SupplyOverflow, "genesis total exceeds 2^64-1");
    }
    supply += allocation.amount;
    accounts.credit(allocation.beneficiary, allocation.amount);
  }

  Ledger ledger(path, clock_mode, handler);
  ledger.lock_ = std::make_shared<FileLock>(path);

  Block genesis_block;
  genesis_block.height = 0;
  genesis_block.timestamp = ledger.now();
  genesis_block.prev_hash = Hash32{};  // 32 zero bytes
  uint64_t nonce = 0;
  for (const auto& allocation : genesis) {
    Transaction tx;
    tx.nonce = nonce++;
    tx.sender = kSystemSender;
    tx.payload = allocation;
    tx.signature.scheme_id = kSchemeNone;
    genesis_block.transactions.push_back(std::move(tx));
  }
  genesis_block.block_hash = genesis_block.compute_hash();

  try {
    {
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      if (!out) {
        throw Error(ErrorCode::IoError, "cannot create ledger file " + path.string());
      }
      Bytes header = make_header(clock_mode);
      out.write(reinterpret_cast<const char*>(header.data()),
                static_cast<std::streamsize>(header.size()));
      out.flush();
      if (!out) {
        throw Error(ErrorCode::IoError, "short write creating " + path.string());
      }
    }
    ledger.append_block_to_file(genesis_block);
  } catch (...) {
    // never leave a half-written genesis behind
    std::error_code ec;
    std::filesystem::remove(path, ec);
    throw;
  }

  ledger.blocks_.push_back(std::move(genesis_block));
  ledger.accounts_ = std::move(accounts);
  return ledger;
}

namespace {

struct FileReplay {
  ClockMode mode = ClockMode::Wall;
  std::vector<Block> blocks;
  std::vector<LedgerEvent> events;
  AccountState accounts;
  std::map<Address, uint64_t> nonces;
};

// Parses and fully revalidates a ledger file image, streaming payloads
// through the handler. Returns nullopt with (fail_height, reason) set on the
// first inconsistency.
std::optional<FileReplay> replay_file_bytes(BytesView file, PayloadHandler& handler,
                                            uint64_t& fail_height, std::string& reason) {
  fail_height = 0;

  if (file.size() < kHeaderSize) {
    reason = "file shorter than header";
    return std::nullopt;
  }
  if (std::memcmp(file.data(), kLedgerMagic, 4) != 0) {
    reason = "bad magic bytes";
    return std::nullopt;
  }
  if (file[4] != kLedgerVersion) {
    reason = "unsupported ledger version " + std::to_string(file[4]);
    return std::nullopt;
  }
  uint8_t flags = file[5];
  if (flags > 1) {
    reason = "unknown header flags";
    return std::nullopt;
  }
  Hash32 header_digest = sha256(file.subspan(0, 6));
  if (std::memcmp(header_digest.data(), file.data() + 6, 32) != 0) {
    reason = "header digest mismatch";
    return std::nullopt;
  }

  FileReplay replay;
  replay.mode = static_cast<ClockMode>(flags);

  size_t pos = kHeaderSize;
  uint64_t height = 0;
  Amount genesis_supply = 0;
  while (pos < file.size()) {
    fail_height = height;
    if (file.size() - pos < 4) {
      reason = "truncated record length";
      return std::nullopt;
    }
    uint32_t len = (static_cast<uint32_t>(file[pos]) << 24) |
                   (static_cast<uint32_t>(file[pos + 1]) << 16) |
                   (static_cast<uint32_t>(file[pos + 2]) << 8) |
                   static_cast<uint32_t>(file[pos + 3]);
    pos += 4;
    if (file.size() - pos < len) {
      reason = "truncated block record";
      return std::nullopt;
    }

    Block block;
    try {
      block = Block::decode(file.subspan(pos, len));
    } catch (const Error& e) {
      reason = e.what();
      return std::nullopt;
    }
    pos += len;

    if (block.compute_hash() != block.block_hash) {
      reason = "block hash mismatch";
      return std::nullopt;
    }
    if (block.height != height) {
      reason = "unexpected block height " + std::to_string(block.height);
      return std::nullopt;
    }
    Hash32 expected_prev = height == 0 ? Hash32{} : replay.blocks.back().block_hash;
    if (block.prev_hash != expected_prev) {
      reason = "previous-hash link broken";
      return std::nullopt;
    }
    if (replay.mode == ClockMode::Logical && block.timestamp != block.height) {
      reason = "logical timestamp does not equal height";
      return std::nullopt;
    }
    if (height > 0 && block.transactions.size() != 1) {
      reason = "non-genesis block must contain exactly one transaction";
      return std::nullopt;
    }

    uint32_t index = 0;
    for (const auto& tx : block.transactions) {
      TxRef ref{block.height, index++};
      if (height == 0) {
        // genesis: unsigned system allocations only
        if (!std::holds_alternative<GenesisAllocation>(tx.payload) ||
            tx.sender != kSystemSender || tx.signature.scheme_id != kSchemeNone ||
            !tx.public_key.empty() || !tx.signature.bytes.empty() ||
            tx.nonce != ref.index) {
          reason = "malformed genesis transaction";
          return std::nullopt;
        }
        const auto& allocation = std::get<GenesisAllocation>(tx.payload);
        if (allocation.beneficiary.is_zero()) {
          reason = "genesis allocation to the zero address";
          return std::nullopt;
        }
        if (replay.accounts.balances().contains(allocation.beneficiary)) {
          reason = "duplicate genesis address";
          return std::nullopt;
        }
        if (genesis_supply + allocation.amount < genesis_supply) {
          reason = "genesis total exceeds 2^64-1";
          return std::nullopt;
        }
        genesis_supply += allocation.amount;
        replay.accounts.credit(allocation.beneficiary, allocation.amount);
        continue;
      }

      if (std::holds_alternative<GenesisAllocation>(tx.payload)) {
        reason = "genesis allocation outside the genesis block";
        return std::nullopt;
      }
      if (tx.signature.scheme_id != kSchemeEd25519 ||
          tx.public_key.size() != kPublicKeySize) {
        reason = "transaction is not ed25519-signed";
        return std::nullopt;
      }
      PublicKey pk;
      std::copy(tx.public_key.begin(), tx.public_key.end(), pk.bytes.begin());
      if (derive_address(pk) != tx.sender) {
        reason = "public key does not derive the sender address";
        return std::nullopt;
      }
      if (!verify_signature(pk, tx.signing_bytes(), tx.signature)) {
        reason = "invalid transaction signature";
        return std::nullopt;
      }
      uint64_t& expected_nonce = replay.nonces[tx.sender];
      if (tx.nonce != expected_nonce) {
        reason = "nonce " + std::to_string(tx.nonce) + " out of order";
        return std::nullopt;
      }

      try {
        handler.check_transaction(replay.accounts, tx);
      } catch (const Error& e) {
        reason = std::string("payload rejected: ") + e.what();
        return std::nullopt;
      }
      expected_nonce += 1;
      auto events = handler.deliver_transaction(replay.accounts, tx, ref);
      replay.events.insert(replay.events.end(), events.begin(), events.end());
    }

    replay.blocks.push_back(std::move(block));
    height += 1;
  }

  if (replay.blocks.empty()) {
    reason = "ledger file contains no genesis block";
    return std::nullopt;
  }
  return replay;
}

Bytes read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot read ledger file " + path.string());
  }
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

Ledger Ledger::open(const std::filesystem::path& path, PayloadHandler& handler) {
  Bytes file = read_file_bytes(path);

  uint64_t fail_height = 0;
  std::string reason;
  auto replay = replay_file_bytes(file, handler, fail_height, reason);
  if (!replay) {
    throw Error(ErrorCode::MalformedRecord,
                reason + " (height " + std::to_string(fail_height) + ")");
  }

  Ledger ledger(path, replay->mode, handler);
  ledger.lock_ = std::make_shared<FileLock>(path);
  ledger.blocks_ = std::move(replay->blocks);
  ledger.events_ = std::move(replay->events);
  ledger.accounts_ = std::move(replay->accounts);
  ledger.next_nonce_ = std::move(replay->nonces);
  return ledger;
}

void Ledger::append_block_to_file(const Block& block) {
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot append to ledger file " + path_.string());
  }
  Bytes record = block.encode();
  Encoder frame;
  frame.u32(static_cast<uint32_t>(record.size()));
  out.write(reinterpret_cast<const char*>(frame.data().data()), 4);
  out.write(reinterpret_cast<const char*>(record.data()),
            static_cast<std::streamsize>(record.size()));
  out.flush();
  if (!out) {
    throw Error(ErrorCode::IoError, "short write appending block " +
                                        std::to_string(block.height));
  }
}

uint64_t Ledger::next_nonce(const Address& sender) const {
  std::shared_lock lock(*mutex_);
  auto it = next_nonce_.find(sender);
  return it == next_nonce_.end() ? 0 : it->second;
}

Amount Ledger::balance(const Address& address) const {
  std::shared_lock lock(*mutex_);
  return accounts_.balance(address);
}

Amount Ledger::total_supply() const {
  std::shared_lock lock(*mutex_);
  return accounts_.total_supply();
}

AccountState Ledger::accounts_snapshot() const {
  std::shared_lock lock(*mutex_);
  return accounts_;
}

TxRef Ledger::submit_transaction(const Transaction& tx) {
  if (std::holds_alternative<GenesisAllocation>(tx.payload)) {
    throw Error(ErrorCode::InvalidPayload,
                "genesis allocations are sealed at initialization");
  }
  if (tx.sender.is_zero()) {
    throw Error(ErrorCode::BadSignature, "the zero address cannot submit");
  }
  if (tx.signature.scheme_id != kSchemeEd25519 ||
      tx.public_key.size() != kPublicKeySize) {
    throw Error(ErrorCode::BadSignature, "transaction is not ed25519-signed");
  }
  PublicKey pk;
  std::copy(tx.public_key.begin(), tx.public_key.end(), pk.bytes.begin());
  if (derive_address(pk) != tx.sender) {
    throw Error(ErrorCode::BadSignature,
                "public key does not derive the sender address");
  }
  if (!verify_signature(pk, tx.signing_bytes(), tx.signature)) {
    throw Error(ErrorCode::BadSignature, "signature verification failed");
  }

  // single writer: concurrent submitters are serialized from here on
  std::unique_lock lock(*mutex_);

  uint64_t expected_nonce = 0;
  if (auto it = next_nonce_.find(tx.sender); it != next_nonce_.end()) {
    expected_nonce = it->second;
  }
  if (tx.nonce != expected_nonce) {
    throw Error(ErrorCode::BadNonce,
                "expected nonce " + std::to_string(expected_nonce) + ", got " +
                    std::to_string(tx.nonce));
  }

  handler_->check_transaction(accounts_, tx);

  // One sealed block per accepted transaction.
  Block block;
  block.height = blocks_.size();
  block.timestamp = now();
  block.prev_hash = blocks_.back().block_hash;
  block.transactions.push_back(tx);
  block.block_hash = block.compute_hash();

  TxRef ref{block.height, 0};
  append_block_to_file(block);  // persists or throws; nothing mutated yet

  blocks_.push_back(std::move(block));
  next_nonce_[tx.sender] = expected_nonce + 1;
  auto events = handler_->deliver_transaction(accounts_, tx, ref);
  events_.insert(events_.end(), events.begin(), events.end());
  return ref;
}

std::vector<LedgerEvent> Ledger::events(std::optional<ContractId> contract_id,
                                        std::optional<EventKind> kind) const {
  std::shared_lock lock(*mutex_);
  std::vector<LedgerEvent> out;
  for (const auto& event : events_) {
    if (contract_id && event.contract_id != *contract_id) continue;
    if (kind && event.kind != *kind) continue;
    out.push_back(event);
  }
  return out;
}

VerificationReport Ledger::verify_chain(PayloadHandler& fresh_handler) const {
  // hold the reader lock across file read and state comparison so the
  // verification sees one consistent sealed-block prefix
  std::shared_lock lock(*mutex_);

  VerificationReport report;
  Bytes file;
  try {
    file = read_file_bytes(path_);
  } catch (const Error& e) {
    report.reason = e.what();
    return report;
  }
  uint64_t fail_height = 0;
  std::string reason;
  auto replay = replay_file_bytes(file, fresh_handler, fail_height, reason);
  if (!replay) {
    report.failing_height = fail_height;
    report.reason = reason;
    return report;
  }
  report.blocks_checked = replay->blocks.size();

  // The file checks out on its own; now compare against this live instance.
  if (replay->blocks.size() != blocks_.size() ||
      replay->blocks.back().block_hash != tip().block_hash) {
    report.state_match = false;
    report.failing_height = replay->blocks.size() - 1;
    report.reason = "stored tip does not match recomputed tip";
    return report;
  }
  if (!(replay->accounts == accounts_)) {
    report.state_match = false;
    report.reason = "replayed balances do not match live balances";
    return report;
  }
  report.ok = true;
  return report;
}

VerificationReport Ledger::verify_file(const std::filesystem::path& path,
                                       PayloadHandler& fresh_handler) {
  VerificationReport report;
  Bytes file;
  try {
    file = read_file_bytes(path);
  } catch (const Error& e) {
    report.reason = e.what();
    return report;
  }
  uint64_t fail_height = 0;
  std::string reason;
  auto replay = replay_file_bytes(file, fresh_handler, fail_height, reason);
  if (!replay) {
    report.failing_height = fail_height;
    report.reason = reason;
    return report;
  }
  report.ok = true;
  report.blocks_checked = replay->blocks.size();
  return report;
}

void Ledger::export_jsonl(const std::filesystem::path& out_path) const {
  std::shared_lock lock(*mutex_);
  std::ofstream out(out_path, std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot write export file " + out_path.string());
  }
  for (const auto& block : blocks_) {
    nlohmann::json txs = nlohmann::json::array();
    for (const auto& tx : block.transactions) {
      nlohmann::json payload;
      std::visit(
          [&payload](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, GenesisAllocation>) {
              payload = {{"kind", "GenesisAllocation"},
                         {"beneficiary", p.beneficiary.to_hex()},
                         {"amount", p.amount}};
            } else if constexpr (std::is_same_v<T, CreateContract>) {
              payload = {{"kind", "CreateContract"},
                         {"counterparty", p.counterparty.to_hex()},
                         {"document_fingerprint", p.document.text()}};
            } else if constexpr (std::is_same_v<T, SignContract>) {
              payload = {{"kind", "SignContract"}, {"contract_id", p.contract_id}};
            } else if constexpr (std::is_same_v<T, Transfer>) {
              payload = {{"kind", "Transfer"},
                         {"contract_id", p.contract_id},
                         {"payer", p.payer.to_hex()},
                         {"payee", p.payee.to_hex()},
                         {"amount", p.amount},
                         {"invoice_fingerprint", p.invoice.text()}};
            } else if constexpr (std::is_same_v<T, Unsign>) {
              payload = {{"kind", "Unsign"}, {"contract_id", p.contract_id}};
            }
          },
          tx.payload);
      txs.push_back({{"nonce", tx.nonce},
                     {"sender", tx.sender.to_hex()},
                     {"payload", payload},
                     {"public_key", to_hex(tx.public_key)},
                     {"signature", to_hex(tx.signature.bytes)}});
    }
    nlohmann::json line = {{"height", block.height},
                           {"timestamp", block.timestamp},
                           {"prev_hash", to_hex(block.prev_hash)},
                           {"block_hash", to_hex(block.block_hash)},
                           {"transactions", std::move(txs)}};
    out << line.dump() << "\n";
  }
  out.flush();
  if (!out) {
    throw Error(ErrorCode::IoError, "short write to export file " + out_path.string());
  }
}

}  // namespace mhc
