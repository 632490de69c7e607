#include "rugtrace/lifecycle.hpp"

#include <algorithm>
#include <unordered_map>

#include "rugtrace/errors.hpp"

namespace rugtrace::lifecycle {

using chaindata::ChainStore;
using chaindata::Erc20Transfer;
using chaindata::PairEvent;

std::string_view event_name(const EventKind& kind) {
    struct V {
        std::string_view operator()(const Created&) const { return "Created"; }
        std::string_view operator()(const Minted&) const { return "Minted"; }
        std::string_view operator()(const LiquidityAdded&) const { return "LiquidityAdded"; }
        std::string_view operator()(const Buy&) const { return "Buy"; }
        std::string_view operator()(const Sell&) const { return "Sell"; }
        std::string_view operator()(const LiquidityRemoved&) const { return "LiquidityRemoved"; }
        std::string_view operator()(const PlainTransfer&) const { return "PlainTransfer"; }
    };
    return std::visit(V{}, kind);
}

std::string_view to_string(WindowEnd e) {
    switch (e) {
        case WindowEnd::liquidity_removed: return "liquidity_removed";
        case WindowEnd::drain_swap: return "drain_swap";
        case WindowEnd::last_event: return "last_event";
    }
    return "last_event";
}

std::size_t TokenTimeline::unique_addresses() const {
    std::set<Address> seen;
    for (const auto& e : events)
        for (const auto& t : e.transfers) {
            seen.insert(t.from);
            seen.insert(t.to);
        }
    return seen.size();
}

std::size_t TokenTimeline::remaining_holders() const {
    std::size_t n = 0;
    for (const auto& [addr, bal] : holders_final)
        if (bal > 0 && !contracts.count(addr)) ++n;
    return n;
}

const ReserveSnapshot* TokenTimeline::reserves_at(const Position& pos) const {
    auto it = std::upper_bound(reserves.begin(), reserves.end(), pos,
                               [](const Position& p, const ReserveSnapshot& s) { return p < s.position; });
    if (it == reserves.begin()) return nullptr;
    return &*std::prev(it);
}

namespace {

struct PairChoice {
    Address pair;
    bool token_is_token0 = true;
    Address quote;
    Amount volume = 0;
    Position first;
    std::optional<Position> created_at;
    std::optional<TxHash> created_tx;
};

Amount quote_volume(const std::vector<PairEvent>& events, bool token_is_token0) {
    Amount v = 0;
    for (const auto& e : events)
        if (const auto* s = e.as<chaindata::PairSwap>())
            v += token_is_token0 ? s->amount1_in + s->amount1_out : s->amount0_in + s->amount0_out;
    return v;
}

// Orientation of a pair that never announced itself: the reserve matching the
// pair's replayed token balance at its first Sync identifies the token slot.
std::optional<bool> infer_orientation(const Address& pair, const std::vector<PairEvent>& events,
                                      const std::vector<Erc20Transfer>& transfers, const ChainStore& store) {
    for (const auto& e : events) {
        const auto* sync = e.as<chaindata::PairSync>();
        if (!sync) continue;
        const Position at = store.position_of(e.tx_hash, e.log_index);
        Amount bal = 0;
        for (const auto& t : transfers) {
            if (store.position_of(t.tx_hash, t.log_index) > at) break;
            if (t.to == pair) bal += t.amount;
            if (t.from == pair) bal -= t.amount;
        }
        if (bal == 0) continue;
        if (sync->reserve0 == bal && sync->reserve1 != bal) return true;
        if (sync->reserve1 == bal && sync->reserve0 != bal) return false;
    }
    return std::nullopt;
}

struct Item {
    Position position;
    bool is_transfer = true;
    std::size_t index = 0;
};

}  // namespace

TokenTimeline build_timeline(const Address& token, const ChainStore& store, const LifecycleConfig& config) {
    auto meta = store.token_meta(token);
    if (!meta) throw NotFoundError("token " + token.hex() + " not in store");

    TokenTimeline tl;
    tl.token = token;
    tl.decimals = meta->info.decimals;
    tl.quote = config.weth;
    const auto& transfers = store.transfers_of(token);

    // Candidate pairs.
    std::vector<PairChoice> candidates;
    std::set<Address> announced;
    for (const auto& pc : store.pair_creations()) {
        const auto* k = pc.as<chaindata::PairCreated>();
        if (k->token0 != token && k->token1 != token) continue;
        if (!announced.insert(pc.pair).second) continue;
        PairChoice c;
        c.pair = pc.pair;
        c.token_is_token0 = k->token0 == token;
        c.quote = c.token_is_token0 ? k->token1 : k->token0;
        c.created_at = store.position_of(pc.tx_hash, pc.log_index);
        c.created_tx = pc.tx_hash;
        c.first = *c.created_at;
        candidates.push_back(c);
    }
    {
        std::set<Address> touched;
        for (const auto& t : transfers) {
            touched.insert(t.from);
            touched.insert(t.to);
        }
        for (const auto& p : store.pairs_with_events()) {
            if (announced.count(p) || !touched.count(p)) continue;
            const auto& evs = store.pair_events_of(p);
            auto orient = infer_orientation(p, evs, transfers, store);
            if (!orient) {
                tl.warnings.push_back({"pair_orientation_unknown",
                                       "pair " + p.hex() + " trades the token but its token slot could not be inferred",
                                       std::nullopt});
                continue;
            }
            tl.warnings.push_back({"pair_without_creation",
                                   "pair " + p.hex() + " has events but no PairCreated record", std::nullopt});
            PairChoice c;
            c.pair = p;
            c.token_is_token0 = *orient;
            c.quote = config.weth;
            c.first = evs.empty() ? Position{} : store.position_of(evs.front().tx_hash, evs.front().log_index);
            candidates.push_back(c);
        }
    }
    for (auto& c : candidates) c.volume = quote_volume(store.pair_events_of(c.pair), c.token_is_token0);
    std::stable_sort(candidates.begin(), candidates.end(), [](const PairChoice& a, const PairChoice& b) {
        if (a.volume != b.volume) return a.volume > b.volume;
        return a.first < b.first;
    });
    const std::vector<PairEvent>* pair_events = nullptr;
    if (!candidates.empty()) {
        const auto& c = candidates.front();
        tl.pair = c.pair;
        tl.token_is_token0 = c.token_is_token0;
        tl.quote = c.quote;
        tl.pair_created_at = c.created_at;
        tl.pair_created_tx = c.created_tx;
        if (c.quote != config.weth)
            tl.warnings.push_back({"quote_not_weth", "canonical pair quotes " + c.quote.hex() + ", treated as ETH",
                                   std::nullopt});
        for (std::size_t i = 1; i < candidates.size(); ++i) tl.other_pairs.push_back(candidates[i].pair);
        std::sort(tl.other_pairs.begin(), tl.other_pairs.end());
        pair_events = &store.pair_events_of(c.pair);
    }
    const bool t0 = tl.token_is_token0;

    // Creation.
    if (meta->creation_tx) {
        const auto& tx = store.tx(*meta->creation_tx);
        tl.events.push_back({Created{tx.from}, tx.position(), tx.timestamp, tx.hash, tx.from, {}});
    } else if (!transfers.empty()) {
        tl.warnings.push_back({"creation_unknown", "creation transaction of the token is not in the store", std::nullopt});
    }

    // Merge token transfers and canonical pair events in chain order.
    std::vector<Item> items;
    items.reserve(transfers.size() + (pair_events ? pair_events->size() : 0));
    for (std::size_t i = 0; i < transfers.size(); ++i)
        items.push_back({store.position_of(transfers[i].tx_hash, transfers[i].log_index), true, i});
    if (pair_events)
        for (std::size_t i = 0; i < pair_events->size(); ++i)
            items.push_back({store.position_of((*pair_events)[i].tx_hash, (*pair_events)[i].log_index), false, i});
    std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.position < b.position; });

    const Address pair = tl.pair.value_or(Address{});
    auto ref_of = [&](const Erc20Transfer& t) { return TransferRef{t.log_index, t.from, t.to, t.amount}; };

    std::size_t i = 0;
    while (i < items.size()) {
        const TxHash tx_hash =
            items[i].is_transfer ? transfers[items[i].index].tx_hash : (*pair_events)[items[i].index].tx_hash;
        const auto& tx = store.tx(tx_hash);
        std::size_t j = i;
        while (j < items.size() && items[j].position.block == items[i].position.block &&
               items[j].position.tx_index == items[i].position.tx_index)
            ++j;

        std::vector<std::size_t> unclaimed;  // transfer indices touching the pair
        std::vector<std::size_t> loose;      // transfers not involving the pair
        std::vector<TokenEvent> produced;
        auto make = [&](EventKind kind, const Position& pos, std::vector<std::size_t> claimed) {
            TokenEvent ev{std::move(kind), pos, tx.timestamp, tx.hash, tx.from, {}};
            for (auto k : claimed) ev.transfers.push_back(ref_of(transfers[k]));
            produced.push_back(std::move(ev));
        };
        auto claim = [&]() {
            std::vector<std::size_t> c;
            c.swap(unclaimed);
            return c;
        };

        for (std::size_t k = i; k < j; ++k) {
            const Item& it = items[k];
            if (it.is_transfer) {
                const auto& t = transfers[it.index];
                if (tl.pair && (t.from == pair || t.to == pair))
                    unclaimed.push_back(it.index);
                else
                    loose.push_back(it.index);
                continue;
            }
            const PairEvent& pe = (*pair_events)[it.index];
            if (const auto* sync = pe.as<chaindata::PairSync>()) {
                tl.reserves.push_back({it.position, tx.timestamp, tx.hash, t0 ? sync->reserve1 : sync->reserve0,
                                       t0 ? sync->reserve0 : sync->reserve1});
            } else if (const auto* s = pe.as<chaindata::PairSwap>()) {
                const Amount tok_in = t0 ? s->amount0_in : s->amount1_in;
                const Amount tok_out = t0 ? s->amount0_out : s->amount1_out;
                const Amount eth_in = t0 ? s->amount1_in : s->amount0_in;
                const Amount eth_out = t0 ? s->amount1_out : s->amount0_out;
                auto claimed = claim();
                if (eth_in > eth_out && tok_out > tok_in) {
                    Address buyer = s->to;
                    Amount best = -1;
                    bool to_received = false;
                    for (auto c : claimed) {
                        const auto& t = transfers[c];
                        if (t.from != pair || t.to == pair) continue;
                        if (t.to == s->to) to_received = true;
                        if (t.amount > best) {
                            best = t.amount;
                            if (!to_received) buyer = t.to;
                        }
                    }
                    if (to_received) buyer = s->to;
                    make(Buy{buyer, eth_in - eth_out, tok_out - tok_in}, it.position, std::move(claimed));
                } else if (tok_in > tok_out && eth_out > eth_in) {
                    Address seller = tx.from;
                    Amount best = -1;
                    for (auto c : claimed) {
                        const auto& t = transfers[c];
                        if (t.to != pair || t.from == pair) continue;
                        if (t.amount > best) {
                            best = t.amount;
                            seller = t.from;
                        }
                    }
                    make(Sell{seller, tok_in - tok_out, eth_out - eth_in}, it.position, std::move(claimed));
                } else {
                    tl.warnings.push_back({"swap_unclassified", "swap without a net direction for the token", tx.hash});
                    for (auto c : claimed) loose.push_back(c);
                }
            } else if (const auto* m = pe.as<chaindata::PairMint>()) {
                const Amount tok = t0 ? m->amount0 : m->amount1;
                const Amount eth = t0 ? m->amount1 : m->amount0;
                auto claimed = claim();
                if (tok <= 0 || eth <= 0) {
                    tl.warnings.push_back({"mint_one_sided", "liquidity mint with a zero side", tx.hash});
                    for (auto c : claimed) loose.push_back(c);
                    continue;
                }
                Address provider = tx.from;
                Amount best = -1;
                for (auto c : claimed) {
                    const auto& t = transfers[c];
                    if (t.to == pair && t.from != pair && t.amount > best) {
                        best = t.amount;
                        provider = t.from;
                    }
                }
                make(LiquidityAdded{eth, tok, provider}, it.position, std::move(claimed));
            } else if (const auto* b = pe.as<chaindata::PairBurn>()) {
                const Amount tok = t0 ? b->amount0 : b->amount1;
                const Amount eth = t0 ? b->amount1 : b->amount0;
                auto claimed = claim();
                if (tok <= 0 || eth <= 0) {
                    tl.warnings.push_back({"burn_one_sided", "liquidity burn with a zero side", tx.hash});
                    for (auto c : claimed) loose.push_back(c);
                    continue;
                }
                Address recipient = b->to;
                if (store.is_contract(recipient)) {
                    recipient = tx.from;
                    Amount best = -1;
                    for (auto c : claimed) {
                        const auto& t = transfers[c];
                        if (t.from == pair && t.amount > best && !store.is_contract(t.to)) {
                            best = t.amount;
                            recipient = t.to;
                        }
                    }
                }
                make(LiquidityRemoved{eth, tok, recipient}, it.position, std::move(claimed));
            }
        }
        for (auto c : unclaimed) loose.push_back(c);
        for (auto c : loose) {
            const auto& t = transfers[c];
            const Position pos = store.position_of(t.tx_hash, t.log_index);
            if (t.is_mint())
                make(Minted{t.to, t.amount}, pos, {c});
            else
                make(PlainTransfer{t.from, t.to, t.amount}, pos, {c});
        }
        for (auto& e : produced) tl.events.push_back(std::move(e));
        i = j;
    }
    std::stable_sort(tl.events.begin(), tl.events.end(),
                     [](const TokenEvent& a, const TokenEvent& b) { return a.position < b.position; });
    std::sort(tl.reserves.begin(), tl.reserves.end(),
              [](const ReserveSnapshot& a, const ReserveSnapshot& b) { return a.position < b.position; });

    // Constant-product check: the Sync preceding each Swap in its tx is the
    // post-swap state; the snapshot before that is the pre-swap state.
    if (pair_events) {
        for (const auto& pe : *pair_events) {
            if (!pe.as<chaindata::PairSwap>()) continue;
            const Position at = store.position_of(pe.tx_hash, pe.log_index);
            auto it = std::upper_bound(tl.reserves.begin(), tl.reserves.end(), at,
                                       [](const Position& p, const ReserveSnapshot& s) { return p < s.position; });
            if (it == tl.reserves.begin() || std::prev(it)->tx_hash != pe.tx_hash) continue;
            auto post = std::prev(it);
            if (post == tl.reserves.begin()) continue;
            auto pre = std::prev(post);
            if (post->eth_reserve * post->token_reserve < pre->eth_reserve * pre->token_reserve)
                tl.warnings.push_back({"constant_product", "reserve product decreased across swap", pe.tx_hash});
        }
    }

    // Balance replay.
    std::map<Address, Amount> bal;
    for (const auto& t : transfers) {
        if (!t.from.is_zero()) bal[t.from] -= t.amount;
        bal[t.to] += t.amount;
    }
    for (const auto& [addr, b] : bal) {
        if (b < 0) tl.warnings.push_back({"negative_balance", "replayed balance of " + addr.hex() + " is negative", std::nullopt});
        if (b > 0) tl.holders_final.emplace(addr, b);
    }
    for (const auto& [addr, _] : bal)
        if (store.is_contract(addr)) tl.contracts.insert(addr);
    tl.contracts.insert(token);
    if (tl.pair) tl.contracts.insert(*tl.pair);
    for (const auto& p : tl.other_pairs) tl.contracts.insert(p);
    tl.transfer_count = transfers.size();
    return tl;
}

PriceSeries price_series(const TokenTimeline& timeline) {
    PriceSeries out;
    const Amount scale = pow10(static_cast<unsigned>(timeline.decimals));
    const Amount wei = wei_per_eth();
    for (const auto& e : timeline.events) {
        PricePoint p;
        if (const auto* b = e.as<Buy>()) {
            p.is_buy = true;
            p.trader = b->buyer;
            p.eth = b->eth_in;
            p.tokens = b->tokens_out;
        } else if (const auto* s = e.as<Sell>()) {
            p.is_buy = false;
            p.trader = s->seller;
            p.eth = s->eth_out;
            p.tokens = s->tokens_in;
        } else {
            continue;
        }
        if (p.tokens == 0) {
            out.warnings.push_back({"zero_token_amount", "swap with zero token amount has no price", e.tx_hash});
            continue;
        }
        p.position = e.position;
        p.timestamp = e.timestamp;
        p.tx_hash = e.tx_hash;
        p.price = Rational(p.eth * scale, p.tokens * wei);
        out.points.push_back(std::move(p));
    }
    return out;
}

std::optional<std::size_t> find_drain_swap(const TokenTimeline& timeline, const Rational& drain_share) {
    const Rational keep = 1 - drain_share;
    Amount peak = 0;
    std::size_t next_snapshot = 0;
    bool drained = false;
    std::optional<std::size_t> found;
    for (std::size_t i = 0; i < timeline.events.size(); ++i) {
        const auto& e = timeline.events[i];
        const ReserveSnapshot* latest = nullptr;
        while (next_snapshot < timeline.reserves.size() && timeline.reserves[next_snapshot].position <= e.position) {
            latest = &timeline.reserves[next_snapshot++];
            peak = std::max(peak, latest->eth_reserve);
            if (drained && Rational(latest->eth_reserve) > keep * Rational(peak)) drained = false;
        }
        if (!e.as<Sell>() || peak == 0) continue;
        const ReserveSnapshot* now = timeline.reserves_at(e.position);
        if (!now) continue;
        if (!drained && Rational(now->eth_reserve) <= keep * Rational(peak)) {
            drained = true;
            found = i;
        }
    }
    return found;
}

ScamWindow detect_scam_window(const TokenTimeline& timeline, const LifecycleConfig& config) {
    if (timeline.events.empty()) throw Error("precondition", "scam window of an empty timeline");
    const auto& ev = timeline.events;
    ScamWindow w;

    std::optional<std::size_t> start;
    std::optional<std::size_t> last_removed;
    bool any_swap = false;
    for (std::size_t i = 0; i < ev.size(); ++i) {
        if (!start && ev[i].as<LiquidityAdded>()) start = i;
        if (ev[i].as<LiquidityRemoved>()) last_removed = i;
        if (ev[i].as<Buy>() || ev[i].as<Sell>()) any_swap = true;
    }
    const bool any_liquidity = start.has_value() || last_removed.has_value();
    w.start_index = start.value_or(0);

    if (last_removed) {
        w.end_index = *last_removed;
        w.end_reason = WindowEnd::liquidity_removed;
    } else if (auto drain = find_drain_swap(timeline, config.drain_share)) {
        w.end_index = *drain;
        w.end_reason = WindowEnd::drain_swap;
    } else {
        w.end_index = ev.size() - 1;
        w.end_reason = WindowEnd::last_event;
    }
    if (w.end_index < w.start_index) w.end_index = w.start_index;
    w.low_confidence = !any_liquidity && !any_swap;
    w.start = ev[w.start_index].position;
    w.end = ev[w.end_index].position;
    w.start_time = ev[w.start_index].timestamp;
    w.end_time = ev[w.end_index].timestamp;
    return w;
}

}  // namespace rugtrace::lifecycle
