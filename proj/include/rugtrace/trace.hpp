#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "rugtrace/chaindata.hpp"
#include "rugtrace/roles.hpp"

namespace rugtrace::trace {

using chaindata::AddressTag;
using chaindata::ChainStore;

struct TraceConfig {
    unsigned max_depth = 6;
    Amount dust_threshold = pow10(16);  // 0.01 ETH
    /// Start of the period of interest, normally the scam window start.
    std::optional<std::int64_t> anchor;
    /// High-activity nodes are only followed within [anchor, anchor + this].
    std::int64_t high_activity_window = 7 * 86'400;
    std::size_t high_activity_tx_count = 250;
    /// Record ERC-20 transfers between graph nodes on their edges.
    bool include_token_flows = false;
};

struct NodeInfo {
    Address address;
    std::optional<AddressTag> tag;
    std::set<Role> roles;
    std::size_t tx_count = 0;
    std::int64_t first_seen = 0;
    std::int64_t last_seen = 0;
    Amount peak_balance = 0;
    unsigned depth = 0;
    bool seed = false;
    bool terminal = false;
    bool expanded = false;
    bool high_activity = false;
    /// Offline store has no outgoing history for this address.
    bool history_missing = false;
    // Flow accounting over the node's followed period.
    Amount inflow = 0;            // graph edges in
    Amount outflow = 0;           // graph edges out
    Amount untraced_inflow = 0;   // received from outside the graph
    Amount untraced_outflow = 0;  // dust and contract calls
    Amount net_change = 0;        // stored incoming minus outgoing value
    std::optional<std::int64_t> follow_from;
    std::optional<std::int64_t> follow_until;
};

struct TokenFlow {
    Address token;
    Amount amount = 0;
    std::size_t count = 0;
};

struct Edge {
    Address from;
    Address to;
    Amount total = 0;
    std::size_t tx_count = 0;
    Position first;
    Position last;
    std::int64_t first_time = 0;
    std::int64_t last_time = 0;
    std::vector<TxHash> citations;
    std::vector<TokenFlow> token_flows;
};

struct TraceGraph {
    std::map<Address, NodeInfo> nodes;
    std::map<std::pair<Address, Address>, Edge> edges;
    std::set<Address> seeds;
    std::set<Address> frontier;
    TraceConfig config;
    std::int64_t observed_until = 0;  // latest timestamp in the store

    const NodeInfo* node(const Address& a) const;
    std::vector<const Edge*> out_edges(const Address& a) const;
    std::vector<const Edge*> in_edges(const Address& a) const;
};

/// Breadth-first expansion of outgoing ETH flows from `seeds`.
TraceGraph trace_funds(const std::set<Address>& seeds, const ChainStore& store, const TraceConfig& config = {},
                       const AttributionMap* roles = nullptr);

/// Expands one frontier node by a single level. Returns false when the node
/// is unknown, terminal, or already expanded.
bool expand(TraceGraph& graph, const Address& address, const ChainStore& store,
            const AttributionMap* roles = nullptr);

/// Expands frontier nodes shallower than `graph.config.max_depth` in
/// (depth, address) order until none are left. Nodes without history stay
/// in the frontier. Returns the number of expansions.
std::size_t expand_to_depth(TraceGraph& graph, const ChainStore& store, const AttributionMap* roles = nullptr);

/// Applies a tag. Terminal categories leave the frontier; edges are kept.
void apply_tag(TraceGraph& graph, const AddressTag& tag);

struct PeelConfig {
    std::size_t min_hops = 3;
    Rational forward_share{4, 5};
    std::size_t max_hop_tx_count = 10;
    std::int64_t max_hop_delay = 24 * 3600;
    std::size_t max_paths = 10'000;
};

using Path = std::vector<Address>;

/// Maximal simple paths of untagged nodes in which every intermediate
/// forwards at least `forward_share` of what it received, within
/// `max_hop_delay`, and has a short transaction history.
std::vector<Path> detect_peel_chain(const TraceGraph& graph, const PeelConfig& config = {});

struct BurnerConfig {
    std::size_t max_lifetime_tx = 10;
    std::int64_t inactivity_horizon = 7 * 86'400;
};

std::set<Address> detect_burners(const TraceGraph& graph, const BurnerConfig& config = {});

struct PeelChainFinding {
    Path path;
};
struct ChainHopFinding {
    Address bridge;
    std::string label;
    Amount amount;
};
struct MixerFinding {
    Address mixer;
    std::string label;
    Amount amount;
};
struct CexDepositFinding {
    Address exchange;
    std::string label;
    Amount amount;
    bool kyc_flag = false;
    std::string attribution;  // identified | co-mingled | unknown
};
struct BurnerFinding {
    Address address;
};
struct GamblingFinding {
    Address service;
    std::string label;
    Amount amount;
};
struct NoFinding {};

using FindingKind = std::variant<PeelChainFinding, ChainHopFinding, MixerFinding, CexDepositFinding, BurnerFinding,
                                 GamblingFinding, NoFinding>;

struct LaunderingFinding {
    FindingKind kind;
    std::vector<TxHash> citations;

    std::string_view name() const;
};

struct SummaryConfig {
    PeelConfig peel;
    BurnerConfig burner;
    Amount kyc_threshold = pow10(18);
    unsigned funding_max_depth = 5;
};

struct FundingStep {
    Address address;
    std::string kind;  // burner | active_wallet
    TxHash tx;         // transfer that funded the next step
};

struct FundingTrail {
    std::optional<std::string> source;  // tag label of the origin
    std::optional<Address> source_address;
    std::vector<FundingStep> via;       // from the seed outwards
    std::vector<TxHash> citations;
};

struct CashOut {
    std::string status = "none";  // identified | co-mingled | unknown | none
    std::vector<std::string> exchanges;
    std::vector<std::string> candidates;  // endpoints not attributable to the scammer
};

struct WalletActivity {
    Address address;
    std::int64_t first_seen = 0;
    std::int64_t last_seen = 0;
    std::size_t tx_count = 0;
};

struct LaunderingSummary {
    std::vector<LaunderingFinding> findings;
    std::vector<std::string> strategies;  // sorted
    CashOut cash_out;
    FundingTrail funding;
    std::optional<WalletActivity> wallet;
    std::vector<Path> peel_chains;
    std::set<Address> burners;
};

/// `wallet` is the seed whose funding and activity are reported, normally the
/// deployer.
LaunderingSummary summarize_laundering(const TraceGraph& graph, const ChainStore& store,
                                       const std::optional<Address>& wallet, const SummaryConfig& config = {});

}  // namespace rugtrace::trace
