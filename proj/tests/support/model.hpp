#pragma once

#include <map>
#include <optional>
#include <vector>

#include "mhc/engine.hpp"

namespace mhc::test {

/// Reference model of the contract rules, written directly from the state
/// machine definition and kept independent of the engine's implementation.
/// The lifecycle state is derived from the sign/unsign sets rather than
/// tracked, so any engine drift shows up as a mismatch.
struct ModelContract {
  Address creator;
  Address counterparty;
  Fingerprint document;
  std::vector<Address> signed_by;
  std::vector<Address> unsigned_by;

  bool party(const Address& a) const { return a == creator || a == counterparty; }

  bool in(const std::vector<Address>& set, const Address& a) const {
    return std::find(set.begin(), set.end(), a) != set.end();
  }

  ContractState state() const {
    if (unsigned_by.size() == 2) return ContractState::Deactivated;
    if (unsigned_by.size() == 1) return ContractState::PendingDeactivation;
    if (signed_by.size() == 2) return ContractState::Active;
    return ContractState::Pending;
  }
};

struct Model {
  std::map<Address, Amount> balances;
  std::vector<ModelContract> contracts;

  Amount balance(const Address& a) const {
    auto it = balances.find(a);
    return it == balances.end() ? 0 : it->second;
  }

  // Each try_* mutates the model only when it returns nullopt (accepted).

  std::optional<ErrorCode> try_create(const Address& caller, const Address& counterparty,
                                      const Fingerprint& document) {
    if (caller == counterparty) return ErrorCode::DuplicateParticipant;
    contracts.push_back({caller, counterparty, document, {caller}, {}});
    return std::nullopt;
  }

  std::optional<ErrorCode> try_sign(const Address& caller, ContractId id) {
    if (id >= contracts.size()) return ErrorCode::UnknownContract;
    ModelContract& c = contracts[id];
    if (!c.party(caller)) return ErrorCode::NotParticipant;
    if (c.state() != ContractState::Pending) return ErrorCode::WrongState;
    if (c.in(c.signed_by, caller)) return ErrorCode::AlreadySigned;
    c.signed_by.push_back(caller);
    return std::nullopt;
  }

  std::optional<ErrorCode> try_transfer(const Address& caller, ContractId id,
                                        const Address& payer, const Address& payee,
                                        Amount amount) {
    if (id >= contracts.size()) return ErrorCode::UnknownContract;
    ModelContract& c = contracts[id];
    if (payer != caller) return ErrorCode::PayerMismatch;
    if (c.state() != ContractState::Active &&
        c.state() != ContractState::PendingDeactivation) {
      return ErrorCode::ContractNotActive;
    }
    if (!c.party(payer) || !c.party(payee)) return ErrorCode::NotParticipant;
    if (payer == payee) return ErrorCode::SelfPayment;
    if (amount == 0) return ErrorCode::ZeroAmount;
    if (balance(payer) < amount) return ErrorCode::InsufficientFunds;
    balances[payer] -= amount;
    balances[payee] += amount;
    return std::nullopt;
  }

  std::optional<ErrorCode> try_unsign(const Address& caller, ContractId id) {
    if (id >= contracts.size()) return ErrorCode::UnknownContract;
    ModelContract& c = contracts[id];
    if (!c.party(caller)) return ErrorCode::NotParticipant;
    if (c.state() == ContractState::Pending || c.state() == ContractState::Deactivated) {
      return ErrorCode::WrongState;
    }
    if (c.in(c.unsigned_by, caller)) return ErrorCode::AlreadyUnsigned;
    c.unsigned_by.push_back(caller);
    return std::nullopt;
  }

  // Brute-force query oracles over the full contract list.
  std::vector<ContractId> contract_ids_of(const Address& actor) const {
    std::vector<ContractId> out;
    for (ContractId id = 0; id < contracts.size(); ++id) {
      if (contracts[id].party(actor)) out.push_back(id);
    }
    return out;
  }

  bool is_actor(const Address& actor, ContractId id) const {
    return contracts.at(id).party(actor);
  }
};

}  // namespace mhc::test
