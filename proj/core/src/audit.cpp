#include "mhc/audit.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mhc/hash.hpp"

namespace mhc {

namespace {

constexpr char kEvidenceMagic[4] = {'M', 'H', 'C', 'E'};
constexpr uint8_t kEvidenceVersion = 0x01;

}  // namespace

ReplayedState replay_state(const Ledger& ledger) {
  ReplayedState state;

  // Genesis allocations seed the balances; everything after is event-driven.
  for (const auto& tx : ledger.blocks().front().transactions) {
    if (const auto* allocation = std::get_if<GenesisAllocation>(&tx.payload)) {
      state.accounts.credit(allocation->beneficiary, allocation->amount);
    }
  }

  for (const auto& event : ledger.events()) {
    switch (event.kind) {
      case EventKind::ContractCreated: {
        const auto& detail = std::get<CreateDetail>(event.detail);
        ContractRecord rec;
        rec.contract_id = event.contract_id;
        rec.participants = {event.actor, detail.counterparty};
        rec.creator = event.actor;
        rec.document_fingerprint = detail.document;
        rec.hash_method = detail.document.algorithm;
        rec.state = ContractState::Pending;
        if (event.contract_id != state.contracts.size()) {
          throw Error(ErrorCode::MalformedRecord,
                      "event log creates contracts out of order");
        }
        state.contracts.push_back(std::move(rec));
        break;
      }
      case EventKind::ContractSigned:
        state.contracts.at(event.contract_id).signed_by.push_back(event.actor);
        break;
      case EventKind::ContractActivated:
        state.contracts.at(event.contract_id).state = ContractState::Active;
        break;
      case EventKind::ContractTransfer: {
        const auto& detail = std::get<TransferDetail>(event.detail);
        state.accounts.debit(detail.sender, detail.amount);
        state.accounts.credit(detail.receiver, detail.amount);
        break;
      }
      case EventKind::ContractUnsigned: {
        ContractRecord& rec = state.contracts.at(event.contract_id);
        rec.unsigned_by.push_back(event.actor);
        if (rec.unsigned_by.size() == 1) {
          rec.state = ContractState::PendingDeactivation;
        }
        break;
      }
      case EventKind::ContractDeactivated:
        state.contracts.at(event.contract_id).state = ContractState::Deactivated;
        break;
    }
  }
  return state;
}

namespace {

const ContractRecord& require_replayed_contract(const ReplayedState& state,
                                                ContractId contract_id) {
  if (contract_id >= state.contracts.size()) {
    throw Error(ErrorCode::UnknownContract,
                "no contract with id " + std::to_string(contract_id));
  }
  return state.contracts[contract_id];
}

}  // namespace

AuditReport audit_contract(const Ledger& ledger, ContractId contract_id) {
  ReplayedState replayed = replay_state(ledger);

  AuditReport report;
  report.contract_id = contract_id;
  report.contract = require_replayed_contract(replayed, contract_id);

  const auto events = ledger.events(contract_id);
  for (const auto& event : events) {
    report.timeline.push_back({event.kind, event.tx_ref.height,
                               ledger.blocks()[event.tx_ref.height].timestamp,
                               event.actor});
    if (event.kind == EventKind::ContractTransfer) {
      const auto& detail = std::get<TransferDetail>(event.detail);
      report.transfers.push_back(
          {detail.sender, detail.receiver, detail.amount, detail.invoice, event.tx_ref});
    }
  }

  // Per-direction totals, recomputed from the listed transfers.
  const Address& a = report.contract.participants[0];
  const Address& b = report.contract.participants[1];
  report.totals[0] = {a, b, 0};
  report.totals[1] = {b, a, 0};
  for (const auto& transfer : report.transfers) {
    if (transfer.sender == a) {
      report.totals[0].total += transfer.amount;
    } else {
      report.totals[1].total += transfer.amount;
    }
  }

  Engine fresh;
  report.integrity = ledger.verify_chain(fresh);

  // Anomaly: several contracts registered against one legal document.
  std::vector<ContractId> sharing;
  for (const auto& other : replayed.contracts) {
    if (other.document_fingerprint == report.contract.document_fingerprint) {
      sharing.push_back(other.contract_id);
    }
  }
  if (sharing.size() > 1) {
    std::string ids;
    for (ContractId id : sharing) {
      if (!ids.empty()) ids += ", ";
      ids += std::to_string(id);
    }
    report.anomalies.push_back(
        {"duplicate-document-fingerprint", "contracts " + ids + " share one document"});
  }

  // Anomaly: transfers made after one party already unsigned (informational).
  size_t unsign_count = 0;
  for (const auto& event : events) {
    if (event.kind == EventKind::ContractUnsigned) {
      unsign_count += 1;
    } else if (event.kind == EventKind::ContractTransfer && unsign_count == 1) {
      report.anomalies.push_back(
          {"transfer-during-pending-deactivation",
           "transfer at height " + std::to_string(event.tx_ref.height)});
    }
  }

  return report;
}

bool verify_document_link(const Ledger& ledger, ContractId contract_id,
                          BytesView document) {
  ReplayedState replayed = replay_state(ledger);
  const ContractRecord& rec = require_replayed_contract(replayed, contract_id);
  return verify_fingerprint(document, rec.document_fingerprint);
}

// -- report rendering ----------------------------------------------------

std::string AuditReport::to_text() const {
  std::ostringstream out;
  out << "contract " << contract_id << " [" << contract_state_name(contract.state)
      << "]\n";
  out << "  creator       " << contract.creator.to_hex() << "\n";
  out << "  counterparty  " << contract.participants[1].to_hex() << "\n";
  out << "  document      " << contract.document_fingerprint.text() << "\n";
  out << "timeline:\n";
  for (const auto& entry : timeline) {
    out << "  height " << entry.height << "  t=" << entry.timestamp << "  "
        << event_kind_name(entry.kind) << "  by " << entry.actor.to_hex() << "\n";
  }
  out << "transfers:\n";
  if (transfers.empty()) {
    out << "  (none)\n";
  }
  for (const auto& transfer : transfers) {
    out << "  " << transfer.sender.to_hex() << " -> " << transfer.receiver.to_hex()
        << "  amount " << transfer.amount << "  invoice " << transfer.invoice.text()
        << "  (block " << transfer.tx_ref.height << " tx " << transfer.tx_ref.index
        << ")\n";
  }
  out << "totals:\n";
  for (const auto& total : totals) {
    out << "  " << total.from.to_hex() << " -> " << total.to.to_hex() << "  "
        << total.total << "\n";
  }
  out << "integrity: " << (integrity.ok ? "OK" : "FAIL") << " ("
      << integrity.blocks_checked << " blocks)";
  if (!integrity.ok) {
    out << " height " << integrity.failing_height << ": " << integrity.reason;
  }
  out << "\n";
  if (!anomalies.empty()) {
    out << "anomalies:\n";
    for (const auto& anomaly : anomalies) {
      out << "  " << anomaly.kind << ": " << anomaly.detail << "\n";
    }
  }
  return out.str();
}

std::string AuditReport::to_json_string(int indent) const {
  nlohmann::json contract_json = {
      {"state", contract_state_name(contract.state)},
      {"creator", contract.creator.to_hex()},
      {"participants",
       {contract.participants[0].to_hex(), contract.participants[1].to_hex()}},
      {"document_fingerprint", contract.document_fingerprint.text()},
      {"hash_method", algorithm_name(contract.hash_method)},
  };
  nlohmann::json signed_by = nlohmann::json::array();
  for (const auto& addr : contract.signed_by) signed_by.push_back(addr.to_hex());
  nlohmann::json unsigned_by = nlohmann::json::array();
  for (const auto& addr : contract.unsigned_by) unsigned_by.push_back(addr.to_hex());
  contract_json["signed_by"] = std::move(signed_by);
  contract_json["unsigned_by"] = std::move(unsigned_by);

  nlohmann::json timeline_json = nlohmann::json::array();
  for (const auto& entry : timeline) {
    timeline_json.push_back({{"kind", event_kind_name(entry.kind)},
                             {"height", entry.height},
                             {"timestamp", entry.timestamp},
                             {"actor", entry.actor.to_hex()}});
  }
  nlohmann::json transfers_json = nlohmann::json::array();
  for (const auto& transfer : transfers) {
    transfers_json.push_back({{"sender", transfer.sender.to_hex()},
                              {"receiver", transfer.receiver.to_hex()},
                              {"amount", transfer.amount},
                              {"invoice_fingerprint", transfer.invoice.text()},
                              {"height", transfer.tx_ref.height},
                              {"tx_index", transfer.tx_ref.index}});
  }
  nlohmann::json totals_json = nlohmann::json::array();
  for (const auto& total : totals) {
    totals_json.push_back({{"from", total.from.to_hex()},
                           {"to", total.to.to_hex()},
                           {"total", total.total}});
  }
  nlohmann::json integrity_json = {{"ok", integrity.ok},
                                   {"blocks", integrity.blocks_checked}};
  if (!integrity.ok) {
    integrity_json["failing_height"] = integrity.failing_height;
    integrity_json["reason"] = integrity.reason;
  }
  nlohmann::json anomalies_json = nlohmann::json::array();
  for (const auto& anomaly : anomalies) {
    anomalies_json.push_back({{"kind", anomaly.kind}, {"detail", anomaly.detail}});
  }

  nlohmann::json doc = {{"contract_id", contract_id},
                        {"contract", std::move(contract_json)},
                        {"timeline", std::move(timeline_json)},
                        {"transfers", std::move(transfers_json)},
                        {"totals", std::move(totals_json)},
                        {"integrity", std::move(integrity_json)},
                        {"anomalies", std::move(anomalies_json)}};
  return doc.dump(indent);
}

// -- evidence bundles ------------------------------------------------------

Bytes EvidenceBundle::encode() const {
  Encoder enc;
  enc.raw(BytesView(reinterpret_cast<const uint8_t*>(kEvidenceMagic), 4));
  enc.u8(kEvidenceVersion);
  enc.raw(contract.encode());
  enc.u32(static_cast<uint32_t>(events.size()));
  for (const auto& event : events) {
    enc.raw(event.encode());
  }
  enc.u32(static_cast<uint32_t>(headers.size()));
  for (const auto& header : headers) {
    enc.u64(header.height);
    enc.u64(header.timestamp);
    enc.raw(header.prev_hash);
    enc.raw(header.block_hash);
    enc.u32(header.tx_count);
  }
  enc.u32(static_cast<uint32_t>(document_fingerprints.size()));
  for (const auto& fp : document_fingerprints) {
    put_fingerprint(enc, fp);
  }
  Bytes out = enc.take();
  Hash32 digest = sha256(out);
  out.insert(out.end(), digest.begin(), digest.end());
  return out;
}

EvidenceBundle export_evidence(const Ledger& ledger, ContractId contract_id,
                               const std::filesystem::path& out_path) {
  ReplayedState replayed = replay_state(ledger);

  EvidenceBundle bundle;
  bundle.contract = require_replayed_contract(replayed, contract_id);
  bundle.events = ledger.events(contract_id);

  // Full header chain from genesis so the bundle is anchored and the links
  // are checkable offline.
  for (const auto& block : ledger.blocks()) {
    bundle.headers.push_back({block.height, block.timestamp, block.prev_hash,
                              block.block_hash,
                              static_cast<uint32_t>(block.transactions.size())});
  }

  bundle.document_fingerprints.push_back(bundle.contract.document_fingerprint);
  for (const auto& event : bundle.events) {
    if (const auto* detail = std::get_if<TransferDetail>(&event.detail)) {
      auto& fps = bundle.document_fingerprints;
      if (std::find(fps.begin(), fps.end(), detail->invoice) == fps.end()) {
        fps.push_back(detail->invoice);
      }
    }
  }

  Bytes file = bundle.encode();
  std::copy(file.end() - 32, file.end(), bundle.export_digest.begin());

  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot write evidence file " + out_path.string());
  }
  out.write(reinterpret_cast<const char*>(file.data()),
            static_cast<std::streamsize>(file.size()));
  out.flush();
  if (!out) {
    throw Error(ErrorCode::IoError, "short write to evidence file " + out_path.string());
  }
  return bundle;
}

EvidenceBundle load_evidence(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot read evidence file " + path.string());
  }
  Bytes file{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (file.size() < 4 + 1 + 32) {
    throw Error(ErrorCode::MalformedRecord, "evidence file too short");
  }

  Hash32 digest = sha256(BytesView(file.data(), file.size() - 32));
  if (!std::equal(digest.begin(), digest.end(), file.end() - 32)) {
    throw Error(ErrorCode::MalformedRecord,
                "export fingerprint mismatch; bundle bytes were altered");
  }

  Decoder dec(BytesView(file.data(), file.size() - 32));
  std::array<uint8_t, 4> magic;
  dec.raw(magic);
  if (std::memcmp(magic.data(), kEvidenceMagic, 4) != 0) {
    throw Error(ErrorCode::MalformedRecord, "not an evidence bundle");
  }
  if (dec.u8() != kEvidenceVersion) {
    throw Error(ErrorCode::MalformedRecord, "unsupported evidence bundle version");
  }

  EvidenceBundle bundle;
  bundle.contract = ContractRecord::decode(dec);
  uint32_t event_count = dec.u32();
  for (uint32_t i = 0; i < event_count; ++i) {
    bundle.events.push_back(LedgerEvent::decode(dec));
  }
  uint32_t header_count = dec.u32();
  for (uint32_t i = 0; i < header_count; ++i) {
    BlockHeader header;
    header.height = dec.u64();
    header.timestamp = dec.u64();
    dec.raw(header.prev_hash);
    dec.raw(header.block_hash);
    header.tx_count = dec.u32();
    bundle.headers.push_back(header);
  }
  uint32_t fp_count = dec.u32();
  for (uint32_t i = 0; i < fp_count; ++i) {
    bundle.document_fingerprints.push_back(get_fingerprint(dec));
  }
  dec.expect_done();
  bundle.export_digest = digest;
  return bundle;
}

bool verify_evidence(const EvidenceBundle& bundle) {
  if (bundle.headers.empty()) return false;
  if (bundle.headers.front().height != 0) return false;
  if (bundle.headers.front().prev_hash != Hash32{}) return false;
  for (size_t i = 1; i < bundle.headers.size(); ++i) {
    if (bundle.headers[i].height != bundle.headers[i - 1].height + 1) return false;
    if (bundle.headers[i].prev_hash != bundle.headers[i - 1].block_hash) return false;
  }
  for (const auto& event : bundle.events) {
    if (event.tx_ref.height >= bundle.headers.size()) return false;
    if (event.tx_ref.index >= bundle.headers[event.tx_ref.height].tx_count)
      return false;
  }
  return true;
}

}  // namespace mhc
