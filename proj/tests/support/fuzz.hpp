#pragma once

#include <gtest/gtest.h>

#include <optional>
#include <random>

#include "mhc/audit.hpp"
#include "mhc/engine.hpp"
#include "support/model.hpp"
#include "support/test_support.hpp"

namespace mhc::test {

/// Drives random operation sequences against a real engine+ledger pair and
/// the reference model in lockstep. Asserts that acceptance, rejection codes,
/// resulting state and atomicity all agree, op by op.
class FuzzSession {
 public:
  FuzzSession(uint64_t seed, size_t actor_count, size_t max_contracts, Amount funding)
      : rng_(seed), max_contracts_(max_contracts) {
    std::vector<GenesisAllocation> genesis;
    for (size_t i = 0; i < actor_count; ++i) {
      auto kp = seeded_keypair(static_cast<uint8_t>(0x10 + i));
      Address addr = derive_address(kp.public_key);
      actors_.push_back(kp);
      addresses_.push_back(addr);
      genesis.push_back({addr, funding});
      model_.balances[addr] = funding;
    }
    ledger_.emplace(Ledger::create(dir_.file("fuzz.mhcl"), genesis,
                                   ClockMode::Logical, engine_));
    engine_.bind(*ledger_);
  }

  Engine& engine() { return engine_; }
  Ledger& ledger() { return *ledger_; }
  const std::vector<Address>& addresses() const { return addresses_; }
  const Model& model() const { return model_; }
  int accepted() const { return accepted_; }
  int rejected() const { return rejected_; }

  void run_ops(int count) {
    for (int i = 0; i < count; ++i) {
      random_op();
      if (::testing::Test::HasFatalFailure()) return;
    }
    check_state_equivalence();
    check_query_equivalence();
  }

  void random_op() {
    size_t caller_index = rng_() % actors_.size();
    const KeyPair& caller = actors_[caller_index];
    const Address& caller_addr = addresses_[caller_index];

    // snapshot for atomicity checks on rejection
    Hash32 tip_before = ledger_->tip().block_hash;
    size_t events_before = ledger_->events().size();
    AccountState accounts_before = ledger_->accounts();
    size_t contracts_before = engine_.contract_count();
    std::vector<ContractState> states_before;
    for (ContractId id = 0; id < contracts_before; ++id) {
      states_before.push_back(engine_.read_contract(id).state);
    }

    std::optional<ErrorCode> expected;
    std::optional<ErrorCode> actual;

    switch (rng_() % 4) {
      case 0: {  // create
        if (model_.contracts.size() >= max_contracts_) return;
        // occasionally pick the caller itself as counterparty
        const Address& counterparty =
            (rng_() % 10 == 0) ? caller_addr : addresses_[rng_() % addresses_.size()];
        auto document = fingerprint_document(
            random_bytes(rng_, 1, 60),
            rng_() % 2 == 0 ? HashAlgorithm::Sha256 : HashAlgorithm::Keccak256);
        expected = model_.try_create(caller_addr, counterparty, document);
        actual = run_engine([&] {
          engine_.create_contract(caller, counterparty, document);
        });
        break;
      }
      case 1: {  // sign
        ContractId id = random_contract_id();
        expected = model_.try_sign(caller_addr, id);
        actual = run_engine([&] { engine_.create_contract_signature(caller, id); });
        break;
      }
      case 2: {  // transfer
        ContractId id = random_contract_id();
        Address payer = caller_addr;
        if (rng_() % 30 == 0) {  // mismatched invoice payer
          payer = addresses_[rng_() % addresses_.size()];
        }
        const Address& payee = addresses_[rng_() % addresses_.size()];
        Amount amount;
        switch (rng_() % 20) {
          case 0: amount = 0; break;
          case 1: amount = model_.balance(payer) + 1 + rng_() % 100; break;
          default: amount = 1 + rng_() % 30; break;
        }
        auto invoice_fp = fingerprint_document(random_bytes(rng_, 1, 40),
                                               HashAlgorithm::Sha256);
        expected = model_.try_transfer(caller_addr, id, payer, payee, amount);
        actual = run_engine([&] {
          engine_.create_contract_transfer(caller,
                                           Invoice{id, payer, payee, amount, invoice_fp});
        });
        break;
      }
      default: {  // unsign
        ContractId id = random_contract_id();
        expected = model_.try_unsign(caller_addr, id);
        actual = run_engine([&] { engine_.update_contract_unsign(caller, id); });
        break;
      }
    }

    ASSERT_EQ(actual.has_value(), expected.has_value())
        << "engine and model disagree on acceptance";
    if (expected.has_value()) {
      ASSERT_EQ(*actual, *expected)
          << "engine rejected with " << error_name(*actual) << ", model expected "
          << error_name(*expected);
      rejected_ += 1;
      // rejected operations must leave all observable state unchanged
      ASSERT_EQ(ledger_->tip().block_hash, tip_before);
      ASSERT_EQ(ledger_->events().size(), events_before);
      ASSERT_TRUE(ledger_->accounts() == accounts_before);
      ASSERT_EQ(engine_.contract_count(), contracts_before);
    } else {
      accepted_ += 1;
    }

    // lifecycle legality: Pending -> Active -> PendingDeactivation ->
    // Deactivated is the only path, one hop at a time
    for (ContractId id = 0; id < contracts_before; ++id) {
      ContractState before = states_before[id];
      ContractState after = engine_.read_contract(id).state;
      if (before == after) continue;
      bool legal = (before == ContractState::Pending && after == ContractState::Active) ||
                   (before == ContractState::Active &&
                    after == ContractState::PendingDeactivation) ||
                   (before == ContractState::PendingDeactivation &&
                    after == ContractState::Deactivated);
      ASSERT_TRUE(legal) << "illegal transition " << contract_state_name(before)
                         << " -> " << contract_state_name(after) << " on contract "
                         << id;
    }
  }

  /// Engine state must equal the model field for field.
  void check_state_equivalence() {
    ASSERT_EQ(engine_.contract_count(), model_.contracts.size());
    for (ContractId id = 0; id < model_.contracts.size(); ++id) {
      const ModelContract& expected = model_.contracts[id];
      ContractRecord actual = engine_.read_contract(id);
      ASSERT_EQ(actual.contract_id, id);
      ASSERT_EQ(actual.participants[0], expected.creator);
      ASSERT_EQ(actual.participants[1], expected.counterparty);
      ASSERT_EQ(actual.creator, expected.creator);
      ASSERT_EQ(actual.document_fingerprint, expected.document);
      ASSERT_EQ(actual.hash_method, expected.document.algorithm);
      ASSERT_EQ(actual.signed_by, expected.signed_by);
      ASSERT_EQ(actual.unsigned_by, expected.unsigned_by);
      ASSERT_EQ(actual.state, expected.state())
          << "contract " << id << " drifted from the derived lifecycle state";
      // creator-auto-sign invariant
      ASSERT_FALSE(actual.signed_by.empty());
      ASSERT_EQ(actual.signed_by.front(), expected.creator);
    }
    for (const auto& [addr, amount] : model_.balances) {
      ASSERT_EQ(ledger_->balance(addr), amount);
    }
  }

  /// read_contract_ids / read_is_actor agree with brute-force enumeration.
  void check_query_equivalence() {
    for (const Address& actor : addresses_) {
      ASSERT_EQ(engine_.read_contract_ids(actor), model_.contract_ids_of(actor));
      for (ContractId id = 0; id < engine_.contract_count(); ++id) {
        ASSERT_EQ(engine_.read_is_actor(actor, id), model_.is_actor(actor, id));
      }
    }
    // the two query routes agree with each other as well
    for (const Address& actor : addresses_) {
      auto ids = engine_.read_contract_ids(actor);
      for (ContractId id = 0; id < engine_.contract_count(); ++id) {
        bool listed = std::find(ids.begin(), ids.end(), id) != ids.end();
        ASSERT_EQ(engine_.read_is_actor(actor, id), listed);
      }
    }
  }

 private:
  ContractId random_contract_id() {
    // usually a real id, sometimes past the end (unknown contract)
    size_t limit = model_.contracts.size() + 2;
    return limit == 2 ? rng_() % 2 : rng_() % limit;
  }

  template <typename Fn>
  std::optional<ErrorCode> run_engine(Fn&& fn) {
    try {
      fn();
      return std::nullopt;
    } catch (const Error& e) {
      return e.code();
    }
  }

  std::mt19937_64 rng_;
  size_t max_contracts_;
  TempDir dir_;
  Engine engine_;
  std::optional<Ledger> ledger_;
  std::vector<KeyPair> actors_;
  std::vector<Address> addresses_;
  Model model_;
  int accepted_ = 0;
  int rejected_ = 0;
};

}  // namespace mhc::test
