#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include <nlohmann/json.hpp>

#include "mhc/audit.hpp"
#include "mhc/engine.hpp"
#include "mhc/ledger.hpp"

namespace {

using nlohmann::json;

struct CliConfig {
  std::filesystem::path home;
  std::filesystem::path ledger_path;
  std::filesystem::path keystore_dir;
};

std::filesystem::path default_home() {
  if (const char* env = std::getenv("MHC_HOME")) {
    return env;
  }
  if (const char* home = std::getenv("HOME")) {
    return std::filesystem::path(home) / ".mhc";
  }
  return ".mhc";
}

bool valid_identity_name(const std::string& name) {
  if (name.empty()) return false;
  for (char c : name) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
              (c >= '0' && c <= '9') || c == '_' || c == '-';
    if (!ok) return false;
  }
  return true;
}

std::filesystem::path key_file(const CliConfig& config, const std::string& name) {
  return config.keystore_dir / (name + ".key");
}

// --as: a keystore name, or an address owned by some stored key.
mhc::KeyPair resolve_keys(const CliConfig& config, const std::string& spec) {
  if (valid_identity_name(spec) && std::filesystem::exists(key_file(config, spec))) {
    return mhc::load_keypair(key_file(config, spec));
  }
  if (auto addr = mhc::Address::from_hex(spec)) {
    if (std::filesystem::is_directory(config.keystore_dir)) {
      for (const auto& entry : std::filesystem::directory_iterator(config.keystore_dir)) {
        if (entry.path().extension() != ".key") continue;
        auto kp = mhc::load_keypair(entry.path());
        if (mhc::derive_address(kp.public_key) == *addr) return kp;
      }
    }
    throw mhc::Error(mhc::ErrorCode::UnknownIdentity,
                     "no stored key for address " + spec);
  }
  throw mhc::Error(mhc::ErrorCode::UnknownIdentity,
                   "unknown identity '" + spec + "'");
}

// --with/--to/--of: a raw address or a keystore name.
mhc::Address resolve_address(const CliConfig& config, const std::string& spec) {
  if (auto addr = mhc::Address::from_hex(spec)) {
    return *addr;
  }
  if (valid_identity_name(spec) && std::filesystem::exists(key_file(config, spec))) {
    return mhc::derive_address(mhc::load_keypair(key_file(config, spec)).public_key);
  }
  throw mhc::Error(mhc::ErrorCode::UnknownIdentity,
                   "unknown identity '" + spec + "'");
}

mhc::Bytes read_document(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw mhc::Error(mhc::ErrorCode::IoError, "cannot read file " + path.string());
  }
  return mhc::Bytes{std::istreambuf_iterator<char>(in),
                    std::istreambuf_iterator<char>()};
}

struct Node {
  mhc::Engine engine;
  std::optional<mhc::Ledger> ledger;
};

void open_node(Node& node, const CliConfig& config) {
  node.ledger.emplace(mhc::Ledger::open(config.ledger_path, node.engine));
  node.engine.bind(*node.ledger);
}

void emit(bool as_json, const json& doc, const std::string& text) {
  if (as_json) {
    std::cout << doc.dump() << "\n";
  } else {
    std::cout << text << "\n";
  }
}

int run(int argc, char** argv) {
  CLI::App app{"Hybrid contract ledger: two-party contracts with signed, "
               "hash-chained, auditable financial history"};
  app.require_subcommand(1);
  app.fallthrough();

  CliConfig config;
  config.home = default_home();
  std::string home_override;
  std::string ledger_override;
  std::string keystore_override;
  app.add_option("--home", home_override, "base directory (default $MHC_HOME or ~/.mhc)");
  app.add_option("--ledger", ledger_override, "ledger file path");
  app.add_option("--keystore", keystore_override, "key store directory");

  auto finalize_config = [&] {
    if (!home_override.empty()) config.home = home_override;
    config.ledger_path = ledger_override.empty()
                             ? config.home / "ledger.mhcl"
                             : std::filesystem::path(ledger_override);
    config.keystore_dir = keystore_override.empty()
                              ? config.home / "keys"
                              : std::filesystem::path(keystore_override);
  };

  int exit_code = 0;

  // keygen
  auto* keygen = app.add_subcommand("keygen", "generate an identity keypair");
  std::string keygen_name;
  std::string keygen_seed;
  bool keygen_json = false;
  keygen->add_option("--name", keygen_name, "identity name")->required();
  keygen->add_option("--seed", keygen_seed, "64 hex chars; deterministic keypair");
  keygen->add_flag("--json", keygen_json);
  keygen->callback([&] {
    finalize_config();
    if (!valid_identity_name(keygen_name)) {
      throw mhc::Error(mhc::ErrorCode::UnknownIdentity,
                       "identity names are [A-Za-z0-9_-]+");
    }
    auto path = key_file(config, keygen_name);
    if (std::filesystem::exists(path)) {
      throw mhc::Error(mhc::ErrorCode::KeyNameExists,
                       "identity '" + keygen_name + "' already exists");
    }
    mhc::KeyPair kp;
    if (keygen_seed.empty()) {
      kp = mhc::generate_keypair();
    } else {
      auto seed = mhc::from_hex(keygen_seed);
      if (!seed) {
        throw mhc::Error(mhc::ErrorCode::MalformedSeed, "--seed must be hex");
      }
      kp = mhc::generate_keypair(*seed);
    }
    std::filesystem::create_directories(config.keystore_dir);
    mhc::save_keypair(path, kp);
    std::string address = mhc::derive_address(kp.public_key).to_hex();
    emit(keygen_json, {{"name", keygen_name}, {"address", address}}, address);
  });

  // init
  auto* init = app.add_subcommand("init", "create a ledger from a genesis spec");
  std::string genesis_file;
  std::string clock_name = "wall";
  bool init_json = false;
  init->add_option("--genesis", genesis_file, "genesis allocation JSON file")->required();
  init->add_option("--clock", clock_name, "wall|logical")
      ->check(CLI::IsMember({"wall", "logical"}));
  init->add_flag("--json", init_json);
  init->callback([&] {
    finalize_config();
    json spec = json::parse(read_document(genesis_file));
    std::vector<mhc::GenesisAllocation> allocations;
    for (const auto& entry : spec.at("allocations")) {
      mhc::GenesisAllocation allocation;
      allocation.beneficiary = resolve_address(config, entry.at("to").get<std::string>());
      allocation.amount = entry.at("amount").get<uint64_t>();
      allocations.push_back(allocation);
    }
    auto mode = clock_name == "logical" ? mhc::ClockMode::Logical : mhc::ClockMode::Wall;
    if (config.ledger_path.has_parent_path()) {
      std::filesystem::create_directories(config.ledger_path.parent_path());
    }
    Node node;
    node.ledger.emplace(
        mhc::Ledger::create(config.ledger_path, allocations, mode, node.engine));
    emit(init_json,
         {{"path", config.ledger_path.string()},
          {"allocations", allocations.size()},
          {"supply", node.ledger->total_supply()},
          {"clock", clock_name}},
         "initialized " + config.ledger_path.string() + ": " +
             std::to_string(allocations.size()) + " allocation(s), supply " +
             std::to_string(node.ledger->total_supply()));
  });

  // contract create/sign/unsign
  auto* contract = app.add_subcommand("contract", "contract lifecycle operations");
  contract->require_subcommand(1);

  auto* create = contract->add_subcommand("create", "register a contract");
  std::string create_as, create_with, create_doc, create_hash = "sha-256";
  bool create_json = false;
  create->add_option("--as", create_as, "creator identity")->required();
  create->add_option("--with", create_with, "counterparty identity or address")->required();
  create->add_option("--doc", create_doc, "legal contract document")->required();
  create->add_option("--hash", create_hash, "sha-256|keccak-256");
  create->add_flag("--json", create_json);
  create->callback([&] {
    finalize_config();
    Node node;
    open_node(node, config);
    auto caller = resolve_keys(config, create_as);
    auto counterparty = resolve_address(config, create_with);
    auto fp = mhc::fingerprint_document(read_document(create_doc), create_hash);
    mhc::ContractId id = node.engine.create_contract(caller, counterparty, fp);
    auto rec = node.engine.read_contract(id);
    emit(create_json,
         {{"contract_id", id},
          {"state", mhc::contract_state_name(rec.state)},
          {"document_fingerprint", fp.text()}},
         std::to_string(id));
  });

  auto add_sign_like = [&](const char* name, const char* help, bool is_sign) {
    auto* cmd = contract->add_subcommand(name, help);
    auto as = std::make_shared<std::string>();
    auto id = std::make_shared<uint64_t>(0);
    auto as_json = std::make_shared<bool>(false);
    cmd->add_option("--as", *as, "acting identity")->required();
    cmd->add_option("--id", *id, "contract id")->required();
    cmd->add_flag("--json", *as_json);
    cmd->callback([&, as, id, as_json, is_sign] {
      finalize_config();
      Node node;
      open_node(node, config);
      auto caller = resolve_keys(config, *as);
      mhc::ContractState state =
          is_sign ? node.engine.create_contract_signature(caller, *id)
                  : node.engine.update_contract_unsign(caller, *id);
      emit(*as_json,
           {{"contract_id", *id}, {"state", mhc::contract_state_name(state)}},
           mhc::contract_state_name(state));
    });
  };
  add_sign_like("sign", "sign a pending contract", true);
  add_sign_like("unsign", "unsign (deactivate) a contract", false);

  // pay
  auto* pay = app.add_subcommand("pay", "pay an invoice through a contract");
  std::string pay_as, pay_to, pay_invoice;
  uint64_t pay_id = 0;
  uint64_t pay_amount = 0;
  bool pay_json = false;
  pay->add_option("--as", pay_as, "payer identity")->required();
  pay->add_option("--id", pay_id, "contract id")->required();
  pay->add_option("--to", pay_to, "payee identity or address")->required();
  pay->add_option("--amount", pay_amount, "amount, smallest unit")->required();
  pay->add_option("--invoice", pay_invoice, "invoice document")->required();
  pay->add_flag("--json", pay_json);
  pay->callback([&] {
    finalize_config();
    Node node;
    open_node(node, config);
    auto caller = resolve_keys(config, pay_as);
    auto payer = mhc::derive_address(caller.public_key);
    auto payee = resolve_address(config, pay_to);
    // the invoice is hashed the same way as the contract's legal document
    mhc::HashAlgorithm method = node.engine.read_contract(pay_id).hash_method;
    auto invoice_fp = mhc::fingerprint_document(read_document(pay_invoice), method);
    mhc::TxRef ref = node.engine.create_contract_transfer(
        caller, mhc::Invoice{pay_id, payer, payee, pay_amount, invoice_fp});
    uint64_t payer_balance = node.ledger->balance(payer);
    uint64_t payee_balance = node.ledger->balance(payee);
    emit(pay_json,
         {{"height", ref.height},
          {"tx_index", ref.index},
          {"amount", pay_amount},
          {"invoice_fingerprint", invoice_fp.text()},
          {"payer", {{"address", payer.to_hex()}, {"balance", payer_balance}}},
          {"payee", {{"address", payee.to_hex()}, {"balance", payee_balance}}}},
         "block " + std::to_string(ref.height) + " tx " + std::to_string(ref.index) +
             "\n" + payer.to_hex() + " " + std::to_string(payer_balance) + "\n" +
             payee.to_hex() + " " + std::to_string(payee_balance));
  });

  // audit
  auto* audit = app.add_subcommand("audit", "per-contract audit report");
  uint64_t audit_id = 0;
  bool audit_json = false;
  audit->add_option("--id", audit_id, "contract id")->required();
  audit->add_flag("--json", audit_json);
  audit->callback([&] {
    finalize_config();
    Node node;
    open_node(node, config);
    mhc::AuditReport report = mhc::audit_contract(*node.ledger, audit_id);
    if (audit_json) {
      std::cout << report.to_json_string() << "\n";
    } else {
      std::cout << report.to_text();
    }
    if (!report.integrity.ok) exit_code = 1;
  });

  // verify (document link)
  auto* verify = app.add_subcommand("verify", "check a document against a contract");
  std::string verify_doc;
  uint64_t verify_id = 0;
  bool verify_json = false;
  verify->add_option("--doc", verify_doc, "document file")->required();
  verify->add_option("--id", verify_id, "contract id")->required();
  verify->add_flag("--json", verify_json);
  verify->callback([&] {
    finalize_config();
    Node node;
    open_node(node, config);
    bool match = mhc::verify_document_link(*node.ledger, verify_id,
                                           read_document(verify_doc));
    emit(verify_json, {{"contract_id", verify_id}, {"match", match}},
         match ? "MATCH" : "MISMATCH");
    if (!match) exit_code = 1;
  });

  // evidence
  auto* evidence = app.add_subcommand("evidence", "export a dispute evidence bundle");
  uint64_t evidence_id = 0;
  std::string evidence_out;
  bool evidence_json = false;
  evidence->add_option("--id", evidence_id, "contract id")->required();
  evidence->add_option("--out", evidence_out, "output file")->required();
  evidence->add_flag("--json", evidence_json);
  evidence->callback([&] {
    finalize_config();
    Node node;
    open_node(node, config);
    mhc::EvidenceBundle bundle =
        mhc::export_evidence(*node.ledger, evidence_id, evidence_out);
    std::string digest = mhc::to_hex(bundle.export_digest);
    emit(evidence_json,
         {{"contract_id", evidence_id},
          {"path", evidence_out},
          {"export_fingerprint", digest}},
         digest);
  });

  // chain-verify
  auto* chain_verify = app.add_subcommand("chain-verify", "verify the ledger file");
  bool chain_json = false;
  chain_verify->add_flag("--json", chain_json);
  chain_verify->callback([&] {
    finalize_config();
    mhc::Engine fresh;
    mhc::VerificationReport report =
        mhc::Ledger::verify_file(config.ledger_path, fresh);
    if (report.ok) {
      emit(chain_json, {{"ok", true}, {"blocks", report.blocks_checked}},
           "OK " + std::to_string(report.blocks_checked) + " blocks");
    } else {
      emit(chain_json,
           {{"ok", false},
            {"failing_height", report.failing_height},
            {"reason", report.reason}},
           "FAIL height " + std::to_string(report.failing_height) + ": " +
               report.reason);
      exit_code = 1;
    }
  });

  // balance
  auto* balance = app.add_subcommand("balance", "query an account balance");
  std::string balance_of;
  bool balance_json = false;
  balance->add_option("--of", balance_of, "identity or address")->required();
  balance->add_flag("--json", balance_json);
  balance->callback([&] {
    finalize_config();
    Node node;
    open_node(node, config);
    auto addr = resolve_address(config, balance_of);
    uint64_t amount = node.ledger->balance(addr);
    emit(balance_json, {{"address", addr.to_hex()}, {"balance", amount}},
         std::to_string(amount));
  });

  CLI11_PARSE(app, argc, argv);
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const mhc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
