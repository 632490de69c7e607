#include "rugtrace/frauddetect.hpp"

#include <algorithm>

#include "rugtrace/errors.hpp"

namespace rugtrace {

std::string_view to_string(Role r) {
    switch (r) {
        case Role::deployer: return "deployer";
        case Role::deployer_funder: return "deployer_funder";
        case Role::liquidity_provider: return "liquidity_provider";
        case Role::liquidity_remover: return "liquidity_remover";
        case Role::top_seller: return "top_seller";
        case Role::suspected_collusion: return "suspected_collusion";
        case Role::victim_candidate: return "victim_candidate";
        case Role::degen_candidate: return "degen_candidate";
    }
    return "unknown";
}

std::string_view to_string(Certainty c) { return c == Certainty::certain ? "certain" : "suspected"; }

bool is_certain_role(Role r) {
    return r == Role::deployer || r == Role::deployer_funder || r == Role::liquidity_provider ||
           r == Role::liquidity_remover;
}

std::set<Address> certain_set(const AttributionMap& roles) {
    std::set<Address> out;
    for (const auto& [addr, role] : roles)
        if (role.certainty == Certainty::certain) out.insert(addr);
    return out;
}

}  // namespace rugtrace

namespace rugtrace::frauddetect {

using namespace lifecycle;

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::simple_rug_pull: return "simple_rug_pull";
        case Verdict::sell_rug_pull: return "sell_rug_pull";
        case Verdict::none: return "none";
    }
    return "none";
}

std::string_view to_string(Confidence c) {
    switch (c) {
        case Confidence::low: return "low";
        case Confidence::medium: return "medium";
        case Confidence::high: return "high";
    }
    return "low";
}

std::string_view to_string(ExclusionReason r) {
    switch (r) {
        case ExclusionReason::zero_address: return "zero_address";
        case ExclusionReason::contract: return "contract";
        case ExclusionReason::liquidity_remover: return "liquidity_remover";
        case ExclusionReason::scammer_attributed: return "scammer_attributed";
        case ExclusionReason::sold_before_window_end: return "sold_before_window_end";
        case ExclusionReason::sold_after_window_end: return "sold_after_window_end";
    }
    return "unknown";
}

namespace {

void push_unique(std::vector<TxHash>& v, const TxHash& h) {
    if (std::find(v.begin(), v.end(), h) == v.end()) v.push_back(h);
}

bool is_swap(const TokenEvent& e) { return e.as<Buy>() || e.as<Sell>(); }

std::optional<std::size_t> first_swap_index(const TokenTimeline& tl) {
    for (std::size_t i = 0; i < tl.events.size(); ++i)
        if (is_swap(tl.events[i])) return i;
    return std::nullopt;
}

bool has_removal(const TokenTimeline& tl) {
    return std::any_of(tl.events.begin(), tl.events.end(), [](const TokenEvent& e) { return e.as<LiquidityRemoved>(); });
}

/// Index of the swap that drained the pool when the scam ended without a
/// liquidity removal.
std::optional<std::size_t> drain_exit_index(const TokenTimeline& tl, const ScamWindow* window) {
    if (!window || window->end_reason != WindowEnd::drain_swap || has_removal(tl)) return std::nullopt;
    if (window->end_index < tl.events.size() && tl.events[window->end_index].as<Sell>()) return window->end_index;
    return std::nullopt;
}

Rational parse_signed_decimal(const std::string& s) {
    std::string_view v = s;
    bool neg = false;
    if (!v.empty() && (v[0] == '-' || v[0] == '+')) {
        neg = v[0] == '-';
        v.remove_prefix(1);
    }
    const auto dot = v.find('.');
    std::string digits(v.substr(0, dot));
    std::string frac = dot == std::string_view::npos ? "" : std::string(v.substr(dot + 1));
    if (digits.empty()) digits = "0";
    Rational r(parse_amount(digits + frac), pow10(static_cast<unsigned>(frac.size())));
    return neg ? Rational(-r) : r;
}

std::string round2(const Rational& eth) {
    // eth * 1e18 rounded to wei, then 2 places.
    const Rational scaled = eth * Rational(wei_per_eth());
    Amount wei = numerator(scaled) / denominator(scaled);
    return format_eth(wei, 2);
}

}  // namespace

std::optional<PumpFinding> detect_pump_and_dump(const std::vector<PricePoint>& series, const PumpConfig& config,
                                                const ScamWindow* window) {
    std::vector<const PricePoint*> pts;
    for (const auto& p : series)
        if (!window || window->contains(p.position)) pts.push_back(&p);
    if (pts.size() < 3) return std::nullopt;
    const PricePoint& first = *pts.front();
    const PricePoint& last = *pts.back();
    if (first.price <= 0) return std::nullopt;

    std::size_t peak = 0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (pts[i]->price > pts[peak]->price) peak = i;
    const PricePoint& top = *pts[peak];
    if (peak == 0 || peak + 1 == pts.size()) return std::nullopt;

    const Rational rise = top.price / first.price;
    const Rational collapse = (top.price - last.price) / top.price;
    if (rise < config.rise || collapse < config.collapse) return std::nullopt;

    PumpFinding f{first, top, last, rise, collapse, {}};
    // Other local maxima that also rose by the configured factor over the
    // trough preceding them and collapsed afterwards.
    Rational trough = first.price;
    for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
        const Rational& p = pts[i]->price;
        trough = std::min(trough, p);
        if (i == peak) {
            trough = p;
            continue;
        }
        if (p < pts[i - 1]->price || p < pts[i + 1]->price) continue;
        if (trough <= 0 || p / trough < config.rise) continue;
        Rational after = p;
        for (std::size_t j = i + 1; j < pts.size(); ++j) after = std::min(after, pts[j]->price);
        if ((p - after) / p < config.collapse) continue;
        f.secondary_peaks.push_back(*pts[i]);
        trough = p;
    }
    return f;
}

RslResult compute_rsl(const TokenTimeline& tl, const AttributionMap& attribution, const ScamWindow* window,
                      const FraudConfig& config) {
    RslResult r;
    const auto scammers = certain_set(attribution);
    const auto in_set = [&](const Address& a) { return config.rsl_all_addresses || scammers.count(a) > 0; };
    const auto exit_idx = drain_exit_index(tl, window);
    const auto first_swap = first_swap_index(tl);

    bool any_liquidity = false;
    for (std::size_t i = 0; i < tl.events.size(); ++i) {
        const auto& e = tl.events[i];
        if (const auto* s = e.as<Sell>()) {
            if (exit_idx && *exit_idx == i && in_set(s->seller)) {
                r.liquidity_removed += s->eth_out;
                r.drain_exit_tx = e.tx_hash;
                push_unique(r.liquidity_txs, e.tx_hash);
                any_liquidity = true;
            } else if (in_set(s->seller)) {
                r.revenue += s->eth_out;
                push_unique(r.revenue_txs, e.tx_hash);
            }
        } else if (const auto* b = e.as<Buy>()) {
            if (in_set(b->buyer)) {
                r.spend += b->eth_in;
                push_unique(r.spend_txs, e.tx_hash);
            }
        } else if (const auto* a = e.as<LiquidityAdded>()) {
            if (!first_swap || i < *first_swap) {
                r.liquidity_provided += a->eth_in;
                push_unique(r.liquidity_txs, e.tx_hash);
                any_liquidity = true;
            }
        } else if (const auto* rm = e.as<LiquidityRemoved>()) {
            r.liquidity_removed += rm->eth_out;
            push_unique(r.liquidity_txs, e.tx_hash);
            any_liquidity = true;
        }
    }
    if (!any_liquidity) {
        r.warnings.push_back({"no_liquidity_events", "no liquidity events; liquidity change taken as zero", std::nullopt});
        return r;
    }
    if (r.liquidity_removed == 0)
        r.warnings.push_back({"liquidity_not_removed", "liquidity was never removed", std::nullopt});
    r.delta_liquidity = r.liquidity_removed - r.liquidity_provided;
    if (scammers.empty() && !config.rsl_all_addresses)
        r.warnings.push_back({"no_attribution", "no scammer-attributed addresses", std::nullopt});
    return r;
}

ProfitEstimate profit_bounds(const Amount& revenue, const Amount& spend, const Amount& delta_liquidity) {
    ProfitEstimate p;
    p.revenue = revenue;
    p.spend = spend;
    p.delta_liquidity = delta_liquidity;
    p.p_max = revenue + delta_liquidity;
    p.p_min = p.p_max - spend;
    return p;
}

ProfitEstimate profit_bounds(const Amount& revenue, const Amount& spend, const Amount& delta_liquidity,
                             const chaindata::RateTable& rates, const std::string& date) {
    ProfitEstimate p = profit_bounds(revenue, spend, delta_liquidity);
    p.usd_date = date;
    p.usd_rate = rates.rate_on(date);
    p.usd_rate_literal = rates.literal_on(date);
    return p;
}

std::optional<Rational> ProfitEstimate::usd(const Amount& wei) const {
    if (!usd_rate) return std::nullopt;
    return Rational(wei, wei_per_eth()) * *usd_rate;
}

std::vector<Discrepancy> compare_with_published(const ProfitEstimate& est, const PublishedFigures& pub) {
    std::vector<Discrepancy> out;
    const auto check = [&](const char* field, const Amount& computed, const std::optional<std::string>& printed) {
        if (!printed) return;
        const std::string c = format_eth(computed, 2);
        const std::string p = round2(parse_signed_decimal(*printed));
        if (c != p) out.push_back({field, c, *printed});
    };
    check("p_min", est.p_min, pub.p_min);
    check("p_max", est.p_max, pub.p_max);
    return out;
}

VictimSet identify_victims(const TokenTimeline& tl, const AttributionMap& attribution, const ScamWindow& window) {
    VictimSet out;
    std::map<Address, Position> last_sell;
    for (const auto& e : tl.events)
        if (const auto* s = e.as<Sell>()) last_sell[s->seller] = e.position;
    std::map<Address, Position> first_sell;
    for (const auto& e : tl.events)
        if (const auto* s = e.as<Sell>()) first_sell.emplace(s->seller, e.position);

    for (const auto& [addr, bal] : tl.holders_final) {
        if (bal <= 0) continue;
        const auto it = attribution.find(addr);
        if (addr.is_zero()) {
            out.excluded[addr] = ExclusionReason::zero_address;
        } else if (tl.contracts.count(addr)) {
            out.excluded[addr] = ExclusionReason::contract;
        } else if (it != attribution.end() && it->second.has(Role::liquidity_remover)) {
            out.excluded[addr] = ExclusionReason::liquidity_remover;
        } else if (it != attribution.end() && it->second.certainty == Certainty::certain) {
            out.excluded[addr] = ExclusionReason::scammer_attributed;
        } else if (auto fs = first_sell.find(addr); fs != first_sell.end()) {
            out.excluded[addr] = fs->second <= window.end ? ExclusionReason::sold_before_window_end
                                                          : ExclusionReason::sold_after_window_end;
        } else {
            out.victims.insert(addr);
        }
    }
    return out;
}

ScamClassification classify_rug_pull(const TokenTimeline& tl, const AttributionMap& attribution,
                                     const FraudConfig& config) {
    ScamClassification c;
    const bool has_pool_activity = std::any_of(tl.events.begin(), tl.events.end(), [](const TokenEvent& e) {
        return e.as<LiquidityAdded>() || e.as<LiquidityRemoved>() || e.as<Buy>() || e.as<Sell>();
    });
    if (!tl.pair || !has_pool_activity) {
        c.confidence = Confidence::low;
        c.notes.push_back("token has no trading pool activity");
        return c;
    }

    LifecycleConfig lc;
    lc.drain_share = config.drain_share;
    const ScamWindow window = detect_scam_window(tl, lc);
    const auto scammers = certain_set(attribution);
    const auto is_scammer = [&](const Address& a) { return scammers.count(a) > 0; };

    // Reserve statistics up to the end of the window.
    const ReserveSnapshot* peak = nullptr;
    const ReserveSnapshot* final_snap = tl.reserves_at(window.end);
    for (const auto& s : tl.reserves) {
        if (window.end < s.position) break;
        if (!peak || s.eth_reserve > peak->eth_reserve) peak = &s;
    }
    const Amount peak_eth = peak ? peak->eth_reserve : Amount(0);
    const Amount final_eth = final_snap ? final_snap->eth_reserve : Amount(0);
    const bool drained =
        peak_eth > 0 && Rational(final_eth) <= (Rational(1) - config.drain_share) * Rational(peak_eth);

    Amount scammer_sold = 0;
    std::vector<TxHash> sell_txs, buy_txs, add_txs, remove_txs;
    Amount scammer_bought = 0, added = 0, removed = 0;
    bool big_removal = false;
    std::set<Address> providers, recipients;
    for (std::size_t i = 0; i < tl.events.size(); ++i) {
        const auto& e = tl.events[i];
        const bool in_window = i <= window.end_index;
        if (const auto* s = e.as<Sell>(); s && in_window && is_scammer(s->seller)) {
            scammer_sold += s->eth_out;
            push_unique(sell_txs, e.tx_hash);
        } else if (const auto* b = e.as<Buy>(); b && in_window && is_scammer(b->buyer)) {
            scammer_bought += b->eth_in;
            push_unique(buy_txs, e.tx_hash);
        } else if (const auto* a = e.as<LiquidityAdded>()) {
            added += a->eth_in;
            providers.insert(a->provider);
            push_unique(add_txs, e.tx_hash);
        } else if (const auto* rm = e.as<LiquidityRemoved>()) {
            removed += rm->eth_out;
            recipients.insert(rm->recipient);
            push_unique(remove_txs, e.tx_hash);
            const ReserveSnapshot* after = tl.reserves_at(e.position);
            const Amount before = rm->eth_out + (after ? after->eth_reserve : Amount(0));
            if (before > 0 && Rational(rm->eth_out) >= config.drain_share * Rational(before)) big_removal = true;
        }
    }
    const bool cluster = peak_eth > 0 && Rational(scammer_sold) >= config.sell_cluster_share * Rational(peak_eth);

    if (drained && cluster)
        c.verdict = Verdict::sell_rug_pull;
    else if (big_removal && !cluster)
        c.verdict = Verdict::simple_rug_pull;
    else if (big_removal)
        c.verdict = Verdict::sell_rug_pull;

    const auto series = price_series(tl);
    c.pump = detect_pump_and_dump(series.points, config.pump, &window);
    c.pump_and_dump = c.pump.has_value();

    // Evidence, each claim tied to the transactions it rests on.
    for (const auto& e : tl.events)
        if (const auto* cr = e.as<Created>(); cr && !e.tx_hash.is_zero())
            c.evidence.push_back({"token created by " + cr->creator.hex(), {e.tx_hash}});
    if (!add_txs.empty())
        c.evidence.push_back({"liquidity of " + format_eth(added, 4) + " ETH added", add_txs});
    if (!buy_txs.empty())
        c.evidence.push_back({"scammer-attributed buys spent " + format_eth(scammer_bought, 4) + " ETH", buy_txs});
    if (!sell_txs.empty())
        c.evidence.push_back({"scammer-attributed sells returned " + format_eth(scammer_sold, 4) + " ETH", sell_txs});
    if (!remove_txs.empty())
        c.evidence.push_back({"liquidity of " + format_eth(removed, 4) + " ETH removed", remove_txs});
    if (peak && final_snap) {
        std::vector<TxHash> txs{peak->tx_hash};
        push_unique(txs, final_snap->tx_hash);
        c.evidence.push_back({"pool ETH reserve fell from " + format_eth(peak_eth, 4) + " to " +
                                  format_eth(final_eth, 4) + " ETH",
                              txs});
    }
    if (c.pump) {
        std::vector<TxHash> txs{c.pump->first.tx_hash};
        push_unique(txs, c.pump->peak.tx_hash);
        push_unique(txs, c.pump->last.tx_hash);
        c.evidence.push_back({"price rose to " + format_scientific(c.pump->rise_factor) +
                                  " times its first trade, then lost " +
                                  format_scientific(c.pump->collapse_factor * 100) + "% of its peak",
                              txs});
    }

    if (window.low_confidence) c.notes.push_back("scam window could not be anchored to liquidity or swaps");
    if (c.verdict == Verdict::none) {
        c.confidence = Confidence::medium;
        if (!drained && !big_removal) c.notes.push_back("pool was never drained");
        else c.notes.push_back("no attributed sell cluster preceded the drain");
    } else {
        const bool deployer_known = std::any_of(attribution.begin(), attribution.end(),
                                                [](const auto& kv) { return kv.second.has(Role::deployer); });
        const bool provider_attributed =
            std::any_of(providers.begin(), providers.end(), is_scammer);
        bool drainer_attributed = std::any_of(recipients.begin(), recipients.end(), is_scammer);
        if (c.verdict == Verdict::sell_rug_pull && cluster) drainer_attributed = true;
        c.confidence = deployer_known && provider_attributed && drainer_attributed && !window.low_confidence
                           ? Confidence::high
                           : Confidence::medium;
    }
    return c;
}

std::optional<AdvanceFeeFinding> detect_advance_fee(const TokenTimeline& tl, const FraudConfig& config) {
    if (!tl.pair) return std::nullopt;
    std::map<TxHash, std::vector<const TokenEvent*>> by_tx;
    for (const auto& e : tl.events) by_tx[e.tx_hash].push_back(&e);

    AdvanceFeeFinding f;
    std::vector<Rational> shares;
    for (const auto& e : tl.events) {
        const auto* s = e.as<Sell>();
        if (!s || tl.contracts.count(s->seller)) continue;
        ++f.sells_examined;
        Amount debited = 0;
        bool with_liquidity = false;
        for (const TokenEvent* other : by_tx[e.tx_hash]) {
            for (const auto& t : other->transfers)
                if (t.from == s->seller) debited += t.amount;
            if (other->as<LiquidityAdded>()) with_liquidity = true;
        }
        if (debited > s->tokens_in) {
            ++f.sells_short;
            shares.push_back(Rational(debited - s->tokens_in, debited));
            if (f.citations.size() < 10) push_unique(f.citations, e.tx_hash);
        }
        if (with_liquidity) {
            ++f.sells_with_liquidity;
            if (f.citations.size() < 10) push_unique(f.citations, e.tx_hash);
        }
    }
    if (f.sells_examined == 0) return std::nullopt;
    const Rational n(f.sells_examined);
    f.transfer_fee = Rational(f.sells_short) / n >= config.advance_fee_share;
    f.auto_liquidity = Rational(f.sells_with_liquidity) / n >= config.advance_fee_share;
    if (!f.transfer_fee && !f.auto_liquidity) return std::nullopt;
    if (!shares.empty()) {
        std::sort(shares.begin(), shares.end());
        f.median_fee_share = shares[shares.size() / 2];
    }
    return f;
}

}  // namespace rugtrace::frauddetect
