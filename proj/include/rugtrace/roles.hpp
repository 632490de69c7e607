#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "rugtrace/types.hpp"

namespace rugtrace {

enum class Role {
    deployer,
    deployer_funder,
    liquidity_provider,
    liquidity_remover,
    top_seller,
    suspected_collusion,
    victim_candidate,
    degen_candidate,
};

enum class Certainty { certain, suspected };

std::string_view to_string(Role r);
std::string_view to_string(Certainty c);

/// Roles that place an address in the certain set.
bool is_certain_role(Role r);

struct AddressRole {
    Address address;
    std::set<Role> roles;
    Certainty certainty = Certainty::suspected;
    std::vector<std::string> rationale;
    std::vector<TxHash> citations;

    bool has(Role r) const { return roles.count(r) > 0; }
};

using AttributionMap = std::map<Address, AddressRole>;

std::set<Address> certain_set(const AttributionMap& roles);

}  // namespace rugtrace
