#pragma once

#include <map>
#include <optional>
#include <set>
#include <variant>
#include <vector>

#include "rugtrace/chaindata.hpp"

namespace rugtrace::lifecycle {

struct Created {
    Address creator;
};
struct Minted {
    Address to;
    Amount amount;
};
struct LiquidityAdded {
    Amount eth_in;
    Amount tokens_in;
    Address provider;
};
struct Buy {
    Address buyer;
    Amount eth_in;
    Amount tokens_out;
};
struct Sell {
    Address seller;
    Amount tokens_in;
    Amount eth_out;
};
struct LiquidityRemoved {
    Amount eth_out;
    Amount tokens_out;
    Address recipient;
};
struct PlainTransfer {
    Address from;
    Address to;
    Amount amount;
};

using EventKind = std::variant<Created, Minted, LiquidityAdded, Buy, Sell, LiquidityRemoved, PlainTransfer>;

std::string_view event_name(const EventKind& kind);

/// A token Transfer log folded into a timeline event.
struct TransferRef {
    std::uint32_t log_index = 0;
    Address from;
    Address to;
    Amount amount;
};

struct TokenEvent {
    EventKind kind;
    Position position;
    std::int64_t timestamp = 0;
    TxHash tx_hash;
    Address tx_sender;
    std::vector<TransferRef> transfers;

    template <class T>
    const T* as() const { return std::get_if<T>(&kind); }
};

/// Pool reserves after a Sync of the canonical pair, oriented to (eth, token).
struct ReserveSnapshot {
    Position position;
    std::int64_t timestamp = 0;
    TxHash tx_hash;
    Amount eth_reserve;
    Amount token_reserve;
};

struct TokenTimeline {
    Address token;
    int decimals = 18;
    std::optional<Address> pair;
    Address quote;              // the pair's other asset (WETH)
    bool token_is_token0 = true;
    std::optional<Position> pair_created_at;
    std::optional<TxHash> pair_created_tx;
    std::vector<Address> other_pairs;
    std::vector<TokenEvent> events;
    std::map<Address, Amount> holders_final;  // positive balances only
    std::vector<ReserveSnapshot> reserves;
    std::set<Address> contracts;  // participants known to be contracts
    std::size_t transfer_count = 0;
    std::vector<Warning> warnings;

    bool empty() const { return events.empty(); }
    /// Distinct addresses appearing as sender or recipient of a token transfer.
    std::size_t unique_addresses() const;
    /// Holders with a positive balance that are not contracts (the zero
    /// address counts as a holder of burned tokens).
    std::size_t remaining_holders() const;
    /// Latest reserve snapshot at or before `pos`.
    const ReserveSnapshot* reserves_at(const Position& pos) const;
};

struct PricePoint {
    Position position;
    std::int64_t timestamp = 0;
    TxHash tx_hash;
    bool is_buy = true;
    Address trader;
    Amount eth;
    Amount tokens;
    Rational price;  // ETH per whole token
};

struct PriceSeries {
    std::vector<PricePoint> points;
    std::vector<Warning> warnings;
};

struct LifecycleConfig {
    Address weth = Address::parse("0xc02aaa39b223fe8d0a0e5c4f27ead9083c756cc2");
    /// Fraction of the peak ETH reserve that must leave the pool for a sell
    /// sequence to count as draining it.
    Rational drain_share{9, 10};
};

enum class WindowEnd { liquidity_removed, drain_swap, last_event };

struct ScamWindow {
    std::size_t start_index = 0;  // into TokenTimeline::events
    std::size_t end_index = 0;
    Position start;
    Position end;
    std::int64_t start_time = 0;
    std::int64_t end_time = 0;
    WindowEnd end_reason = WindowEnd::last_event;
    bool low_confidence = false;

    bool contains(const Position& p) const { return start <= p && p <= end; }
};

std::string_view to_string(WindowEnd e);

/// Throws NotFoundError when the token is unknown to the store.
TokenTimeline build_timeline(const Address& token, const chaindata::ChainStore& store,
                             const LifecycleConfig& config = {});

/// Execution price of every swap, in chain order.
PriceSeries price_series(const TokenTimeline& timeline);

/// Requires a non-empty timeline (throws Error otherwise).
ScamWindow detect_scam_window(const TokenTimeline& timeline, const LifecycleConfig& config = {});

/// Swap in `timeline` whose post-swap ETH reserve first fell to the drain
/// threshold after the most recent peak, if any.
std::optional<std::size_t> find_drain_swap(const TokenTimeline& timeline, const Rational& drain_share);

}  // namespace rugtrace::lifecycle
