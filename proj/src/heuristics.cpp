#include "rugtrace/heuristics.hpp"

#include <algorithm>
#include <deque>

namespace rugtrace::heuristics {

using namespace lifecycle;
using chaindata::ChainStore;

namespace {

void cite(AddressRole& r, const TxHash& tx) {
    if (std::find(r.citations.begin(), r.citations.end(), tx) == r.citations.end()) r.citations.push_back(tx);
}

AddressRole& entry(AttributionMap& m, const Address& a) {
    auto& r = m[a];
    r.address = a;
    return r;
}

void assign(AttributionMap& m, const Address& a, Role role, const std::string& why, const TxHash& tx) {
    auto& r = entry(m, a);
    r.roles.insert(role);
    if (is_certain_role(role)) r.certainty = Certainty::certain;
    if (std::find(r.rationale.begin(), r.rationale.end(), why) == r.rationale.end()) r.rationale.push_back(why);
    cite(r, tx);
}

bool excluded_from_attribution(const Address& a, const TokenTimeline& tl, const ChainStore& store) {
    return a.is_zero() || tl.contracts.count(a) || store.is_contract(a) || store.tag_of(a).has_value();
}

}  // namespace

std::set<Address> Attribution::suspected() const {
    std::set<Address> out;
    for (const auto& [a, r] : roles)
        if (r.certainty == Certainty::suspected && (r.has(Role::top_seller) || r.has(Role::suspected_collusion)))
            out.insert(a);
    return out;
}

std::set<Address> find_top_sellers(const std::vector<PricePoint>& series, const Rational& epsilon) {
    std::set<Address> out;
    if (series.empty()) return out;
    Rational max = series.front().price;
    for (const auto& p : series) max = std::max(max, p.price);
    const Rational floor = (Rational(1) - epsilon) * max;
    for (const auto& p : series)
        if (!p.is_buy && p.price >= floor) out.insert(p.trader);
    return out;
}

Attribution attribute_scammer_addresses(const TokenTimeline& tl, const ChainStore& store,
                                        const HeuristicsConfig& config, const frauddetect::FraudConfig& fraud) {
    Attribution out;
    auto& roles = out.roles;

    // Deployer and the wallets that funded it.
    std::optional<Position> created_at;
    TxHash creation_tx;
    for (const auto& e : tl.events) {
        if (const auto* c = e.as<Created>(); c && !e.tx_hash.is_zero()) {
            out.deployer = c->creator;
            created_at = e.position;
            creation_tx = e.tx_hash;
            assign(roles, c->creator, Role::deployer, "created the token contract", e.tx_hash);
            break;
        }
    }
    if (!out.deployer)
        out.warnings.push_back({"deployer_unknown", "token creation transaction not found", std::nullopt});

    if (out.deployer) {
        struct Item {
            Address address;
            Position before;
            std::int64_t before_time;
            unsigned depth;
        };
        std::deque<Item> queue{{*out.deployer, *created_at, store.timestamp_of(creation_tx), 0}};
        std::set<Address> visited{*out.deployer};
        while (!queue.empty()) {
            const Item item = queue.front();
            queue.pop_front();
            for (const auto* tx : store.incoming_of(item.address)) {
                if (!tx->succeeded() || tx->value == 0 || !(tx->position() < item.before)) continue;
                if (config.funder_lookback && tx->timestamp < item.before_time - *config.funder_lookback) continue;
                const Address& sender = tx->from;
                if (sender == *out.deployer || excluded_from_attribution(sender, tl, store)) continue;
                const std::string why = item.depth == 0 ? "sent ETH to the deployer before token creation"
                                                        : "funded a wallet that funded the deployer";
                assign(roles, sender, Role::deployer_funder, why, tx->hash);
                if (item.depth + 1 < config.funder_depth && store.tx_count(sender) <= config.funder_max_tx_count &&
                    visited.insert(sender).second)
                    queue.push_back({sender, tx->position(), tx->timestamp, item.depth + 1});
            }
        }
    }

    // Liquidity providers (initial liquidity) and removers.
    std::optional<std::size_t> first_swap;
    for (std::size_t i = 0; i < tl.events.size(); ++i)
        if (tl.events[i].as<Buy>() || tl.events[i].as<Sell>()) {
            first_swap = i;
            break;
        }
    for (std::size_t i = 0; i < tl.events.size(); ++i) {
        const auto& e = tl.events[i];
        if (const auto* a = e.as<LiquidityAdded>(); a && (!first_swap || i < *first_swap)) {
            for (const Address& who : {a->provider, e.tx_sender})
                if (!excluded_from_attribution(who, tl, store))
                    assign(roles, who, Role::liquidity_provider, "provided the initial liquidity", e.tx_hash);
        } else if (const auto* r = e.as<LiquidityRemoved>()) {
            for (const Address& who : {r->recipient, e.tx_sender})
                if (!excluded_from_attribution(who, tl, store))
                    assign(roles, who, Role::liquidity_remover, "removed liquidity from the pool", e.tx_hash);
        }
    }

    const std::set<Address> certain = certain_set(roles);
    if (tl.empty()) return out;

    const PriceSeries series = price_series(tl);
    const auto suspect_ok = [&](const Address& a) {
        return !certain.count(a) && !excluded_from_attribution(a, tl, store);
    };

    // Sellers at the peak price.
    if (!series.points.empty()) {
        const auto tops = find_top_sellers(series.points, config.top_seller_epsilon);
        Rational max = series.points.front().price;
        for (const auto& p : series.points) max = std::max(max, p.price);
        for (const auto& p : series.points) {
            if (p.is_buy || !tops.count(p.trader) || !suspect_ok(p.trader)) continue;
            if (p.price < (Rational(1) - config.top_seller_epsilon) * max) continue;
            assign(roles, p.trader, Role::top_seller, "sold near the highest token price", p.tx_hash);
        }
    }

    // Wallets whose ETH receipts spike during the scam.
    LifecycleConfig lc;
    lc.drain_share = fraud.drain_share;
    const ScamWindow window = detect_scam_window(tl, lc);
    const auto rsl = frauddetect::compute_rsl(tl, roles, &window, fraud);
    const auto profit = frauddetect::profit_bounds(rsl.revenue, rsl.spend, rsl.delta_liquidity);
    if (profit.p_max > 0) {
        const Rational threshold = config.spike_share * Rational(profit.p_max);
        const std::int64_t until = window.end_time + config.spike_followup;
        std::map<Address, std::pair<Amount, std::vector<TxHash>>> receipts;
        for (std::size_t i = window.start_index; i <= window.end_index && i < tl.events.size(); ++i) {
            const auto& e = tl.events[i];
            if (const auto* s = e.as<Sell>()) {
                auto& r = receipts[s->seller];
                r.first += s->eth_out;
                r.second.push_back(e.tx_hash);
            }
        }
        for (const auto& tx : store.transactions()) {
            if (!tx.to || !tx.succeeded() || tx.value == 0) continue;
            if (tx.timestamp < window.start_time || tx.timestamp > until) continue;
            if (certain.count(tx.from) == 0) continue;
            auto& r = receipts[*tx.to];
            r.first += tx.value;
            r.second.push_back(tx.hash);
        }
        for (const auto& [addr, r] : receipts) {
            if (!suspect_ok(addr) || Rational(r.first) < threshold) continue;
            for (const auto& h : r.second)
                assign(roles, addr, Role::suspected_collusion,
                       "received " + format_eth(r.first, 4) + " ETH during the scam", h);
        }
    }

    // Annotations that never attribute.
    std::map<Address, TxHash> last_receipt;
    for (const auto& e : tl.events)
        for (const auto& t : e.transfers) last_receipt[t.to] = e.tx_hash;
    for (const auto& [addr, bal] : tl.holders_final) {
        if (bal <= 0 || addr.is_zero() || tl.contracts.count(addr) || certain.count(addr)) continue;
        const auto it = last_receipt.find(addr);
        if (it == last_receipt.end()) continue;
        assign(roles, addr, Role::victim_candidate, "still holds the token", it->second);
    }
    for (const auto& [addr, tx] : last_receipt) {
        if (addr.is_zero() || tl.contracts.count(addr)) continue;
        if (store.distinct_tokens_received(addr) >= config.degen_token_count)
            assign(roles, addr, Role::degen_candidate,
                   "received " + std::to_string(store.distinct_tokens_received(addr)) + " distinct tokens", tx);
    }
    return out;
}

}  // namespace rugtrace::heuristics
