#pragma once

#include <string>
#include <vector>

#include "mhc/engine.hpp"
#include "mhc/ledger.hpp"

namespace mhc {

/// State reconstructed purely from the genesis block and the event log,
/// independent of the engine's transaction path. Comparing it against live
/// engine state is the event-sourcing equivalence check.
struct ReplayedState {
  std::vector<ContractRecord> contracts;
  AccountState accounts;
};

ReplayedState replay_state(const Ledger& ledger);

struct TimelineEntry {
  EventKind kind = EventKind::ContractCreated;
  uint64_t height = 0;
  uint64_t timestamp = 0;
  Address actor;

  bool operator==(const TimelineEntry&) const = default;
};

struct TransferEntry {
  Address sender;
  Address receiver;
  Amount amount = 0;
  Fingerprint invoice;
  TxRef tx_ref;

  bool operator==(const TransferEntry&) const = default;
};

struct DirectionTotal {
  Address from;
  Address to;
  Amount total = 0;

  bool operator==(const DirectionTotal&) const = default;
};

struct Anomaly {
  std::string kind;
  std::string detail;

  bool operator==(const Anomaly&) const = default;
};

/// Per-contract financial statement assembled from the event log and chain
/// only. Totals are recomputed from the listed transfers, never stored.
struct AuditReport {
  ContractId contract_id = 0;
  ContractRecord contract;
  std::vector<TimelineEntry> timeline;
  std::vector<TransferEntry> transfers;
  std::array<DirectionTotal, 2> totals{};
  VerificationReport integrity;
  std::vector<Anomaly> anomalies;

  std::string to_text() const;
  std::string to_json_string(int indent = -1) const;
};

AuditReport audit_contract(const Ledger& ledger, ContractId contract_id);

/// True iff the document bytes reproduce the contract's registered
/// fingerprint under the contract's own hash method.
bool verify_document_link(const Ledger& ledger, ContractId contract_id,
                          BytesView document);

struct BlockHeader {
  uint64_t height = 0;
  uint64_t timestamp = 0;
  Hash32 prev_hash{};
  Hash32 block_hash{};
  uint32_t tx_count = 0;

  bool operator==(const BlockHeader&) const = default;
};

/// Offline-verifiable export of a contract's full on-ledger history for
/// dispute resolution. File layout: magic "MHCE", version 0x01, canonical
/// bundle encoding, trailing 32-byte export digest over everything before it.
struct EvidenceBundle {
  ContractRecord contract;
  std::vector<LedgerEvent> events;
  std::vector<BlockHeader> headers;  // genesis through tip, hash-linked
  std::vector<Fingerprint> document_fingerprints;
  Hash32 export_digest{};

  bool operator==(const EvidenceBundle&) const = default;

  Bytes encode() const;  // complete file bytes including the trailing digest
};

EvidenceBundle export_evidence(const Ledger& ledger, ContractId contract_id,
                               const std::filesystem::path& out_path);

/// Parses a bundle file, recomputing the export digest. Throws
/// MalformedRecord on any mismatch or decode failure.
EvidenceBundle load_evidence(const std::filesystem::path& path);

/// Offline checks over a loaded bundle: header chain links, genesis anchor,
/// and that every event tx_ref resolves against an included header.
bool verify_evidence(const EvidenceBundle& bundle);

}  // namespace mhc
