#include "rugtrace/report.hpp"

#include <regex>
#include <set>
#include <sstream>

#include "rugtrace/errors.hpp"
#include "rugtrace/keccak.hpp"

namespace rugtrace::report {

namespace {

using exporting::eth_exact;
using exporting::format_rational;

std::string eth_text(const Amount& wei) { return format_eth(wei, 2) + " ETH"; }

void add_unique(std::vector<TxHash>& out, const TxHash& h) {
    if (std::find(out.begin(), out.end(), h) == out.end()) out.push_back(h);
}

std::vector<TxHash> merged(std::initializer_list<const std::vector<TxHash>*> lists) {
    std::vector<TxHash> out;
    for (const auto* l : lists)
        for (const auto& h : *l) add_unique(out, h);
    return out;
}

const std::map<std::string, std::string>& strategy_names() {
    static const std::map<std::string, std::string> m{{"burner_addresses", "Burner addresses"},
                                                      {"chain_hopping", "Chain-hopping"},
                                                      {"gambling", "Gambling"},
                                                      {"mixer", "Mixer"},
                                                      {"peel_chains", "Peel chains"}};
    return m;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
    return out;
}

class Builder {
public:
    explicit Builder(const pipeline::Analysis& a) {
        const auto& ev = a.timeline.events;
        if (a.window) {
            fallback_.push_back(ev[a.window->start_index].tx_hash);
            add_unique(fallback_, ev[a.window->end_index].tx_hash);
        } else if (!ev.empty()) {
            fallback_.push_back(ev.front().tx_hash);
        }
    }

    /// Adds a quantitative claim. Without any supporting transaction the
    /// claim becomes a gap.
    void quantity(Section& s, std::string id, std::string label, std::string value, std::string text,
                  std::vector<TxHash> cites, bool allow_fallback = true) {
        if (cites.empty() && allow_fallback) cites = fallback_;
        if (cites.empty()) {
            gap(s, std::move(id), std::move(label), "no supporting transaction in the data");
            return;
        }
        s.claims.push_back({std::move(id), std::move(label), std::move(value), std::move(text), true, unique(cites)});
    }

    void fact(Section& s, std::string id, std::string label, std::string value, std::string text,
              std::vector<TxHash> cites = {}) {
        s.claims.push_back({std::move(id), std::move(label), std::move(value), std::move(text), false, unique(cites)});
    }

    void gap(Section& s, std::string id, std::string label, std::string reason) {
        gaps_.push_back({s.id + "." + id, reason});
        s.claims.push_back({std::move(id), std::move(label), std::nullopt, std::move(reason), false, {}});
    }

    std::vector<Gap>& gaps() { return gaps_; }
    const std::vector<TxHash>& fallback() const { return fallback_; }

private:
    static std::vector<TxHash> unique(const std::vector<TxHash>& in) {
        std::vector<TxHash> out;
        for (const auto& h : in) add_unique(out, h);
        return out;
    }

    std::vector<TxHash> fallback_;
    std::vector<Gap> gaps_;
};

std::pair<std::optional<TxHash>, std::optional<TxHash>> transfer_bounds(const lifecycle::TokenTimeline& tl) {
    std::optional<TxHash> first, last;
    for (const auto& e : tl.events) {
        if (e.transfers.empty()) continue;
        if (!first) first = e.tx_hash;
        last = e.tx_hash;
    }
    return {first, last};
}

Section characteristics(const pipeline::Analysis& a, Builder& b) {
    Section s{"token_characteristics", "Token characteristics", {}};
    const auto& tl = a.timeline;
    if (a.window) {
        const auto& w = *a.window;
        b.quantity(s, "active_period", "Active period", format_utc(w.start_time) + " to " + format_utc(w.end_time),
                   "Scam window from block " + std::to_string(w.start.block) + " to block " +
                       std::to_string(w.end.block) + ", ended by " + std::string(to_string(w.end_reason)) + ".",
                   b.fallback());
    } else {
        b.gap(s, "active_period", "Active period", "the token has no recorded activity");
    }
    const auto [first_transfer, last_transfer] = transfer_bounds(tl);
    std::vector<TxHash> transfer_cites;
    if (first_transfer) transfer_cites.push_back(*first_transfer);
    if (last_transfer) add_unique(transfer_cites, *last_transfer);
    b.quantity(s, "transfers", "Number of transfers", std::to_string(tl.transfer_count),
               std::to_string(tl.transfer_count) + " token transfers between the first and last cited transaction.",
               transfer_cites);
    b.quantity(s, "unique_addresses", "Unique addresses", std::to_string(tl.unique_addresses()),
               std::to_string(tl.unique_addresses()) + " distinct addresses sent or received the token.",
               transfer_cites);
    std::vector<TxHash> last_cite;
    if (last_transfer) last_cite.push_back(*last_transfer);
    b.quantity(s, "remaining_holders", "Remaining holders", std::to_string(tl.remaining_holders()),
               std::to_string(tl.remaining_holders()) + " addresses still held the token after the last transfer.",
               last_cite);

    const auto& r = a.rsl;
    const auto& p = a.profit;
    b.quantity(s, "revenue", "Revenue (R)", eth_text(r.revenue),
               "Attributed addresses received " + eth_exact(r.revenue) + " ETH (" + r.revenue.str() +
                   " wei) selling the token.",
               r.revenue_txs);
    b.quantity(s, "delta_liquidity", "Liquidity change (ΔL)", eth_text(r.delta_liquidity),
               "Liquidity removed minus liquidity provided: " + eth_exact(r.delta_liquidity) + " ETH (" +
                   r.delta_liquidity.str() + " wei).",
               r.liquidity_txs);
    b.quantity(s, "spend", "Spend (S)", eth_text(r.spend),
               "Attributed addresses spent " + eth_exact(r.spend) + " ETH (" + r.spend.str() + " wei) buying the token.",
               r.spend_txs);

    if (!a.prices.points.empty()) {
        const auto* peak = &a.prices.points.front();
        for (const auto& pt : a.prices.points)
            if (pt.price > peak->price) peak = &pt;
        b.quantity(s, "max_price", "Max price", format_scientific(peak->price, 3) + " ETH",
                   "Highest execution price, " + format_scientific(peak->price, 6) + " ETH per token, at " +
                       format_utc(peak->timestamp) + ".",
                   {peak->tx_hash}, false);
    } else {
        b.gap(s, "max_price", "Max price", "no swaps were recorded");
    }

    const auto all = merged({&r.revenue_txs, &r.spend_txs, &r.liquidity_txs});
    b.quantity(s, "p_min", "Minimum profit (P_min)", eth_text(p.p_min),
               "R + ΔL − S = " + eth_exact(p.p_min) + " ETH (" + p.p_min.str() + " wei).", all);
    b.quantity(s, "p_max", "Maximum profit (P_max)", eth_text(p.p_max),
               "R + ΔL = " + eth_exact(p.p_max) + " ETH (" + p.p_max.str() + " wei).", all);
    if (p.usd_rate) {
        const std::string rate = p.usd_rate_literal ? *p.usd_rate_literal : format_rational(*p.usd_rate, 2);
        const std::string note = " at " + rate + " USD/ETH on " + *p.usd_date + ".";
        b.quantity(s, "p_min_usd", "Minimum profit (USD)", format_rational(*p.usd(p.p_min), 2) + " USD",
                   "P_min valued" + note, all);
        b.quantity(s, "p_max_usd", "Maximum profit (USD)", format_rational(*p.usd(p.p_max), 2) + " USD",
                   "P_max valued" + note, all);
    } else {
        b.gap(s, "usd", "Profit (USD)", "no ETH/USD rate for the scam start date");
    }
    for (const auto& d : a.discrepancies)
        b.quantity(s, "discrepancy_" + d.field, "Published " + d.field,
                   d.computed + " ETH computed vs " + d.published + " ETH published",
                   "The published " + d.field + " does not follow from R, S and ΔL; the computed value is reported.",
                   all);
    return s;
}

Section laundering_section(const trace::LaunderingSummary* sum,
                           const chaindata::ChainStore& store, Builder& b) {
    Section s{"laundering", "Money laundering", {}};
    if (!sum) {
        b.gap(s, "trace", "Trace", "funds were not traced");
        return s;
    }
    if (sum->wallet) {
        const auto& w = *sum->wallet;
        const auto txs = store.transactions_of(w.address);
        std::vector<TxHash> cites{txs.front()->hash};
        add_unique(cites, txs.back()->hash);
        b.quantity(s, "wallet_active", "Wallet active", utc_date(w.first_seen) + " to " + utc_date(w.last_seen),
                   "Primary wallet " + w.address.hex() + " was active from " + format_utc(w.first_seen) + " to " +
                       format_utc(w.last_seen) + ".",
                   cites, false);
        b.quantity(s, "wallet_tx_count", "Wallet transactions", std::to_string(w.tx_count),
                   "The primary wallet sent or received " + std::to_string(w.tx_count) + " transactions.", cites,
                   false);
    } else {
        b.gap(s, "wallet_active", "Wallet active", "the primary wallet is unknown");
    }

    std::vector<TxHash> strategy_cites;
    std::vector<TxHash> cex_cites;
    for (const auto& f : sum->findings) {
        if (std::holds_alternative<trace::CexDepositFinding>(f.kind)) {
            for (const auto& h : f.citations) add_unique(cex_cites, h);
        } else {
            for (const auto& h : f.citations) add_unique(strategy_cites, h);
        }
    }
    std::vector<std::string> names;
    for (const auto& st : sum->strategies) {
        auto it = strategy_names().find(st);
        names.push_back(it == strategy_names().end() ? st : it->second);
    }
    if (names.empty()) {
        b.fact(s, "strategies", "Strategies", "None with primary wallet",
               "No obfuscation was observed in flows from the attributed addresses.");
    } else {
        b.fact(s, "strategies", "Strategies", join(names, ", "),
               "Laundering strategies observed: " + join(names, ", ") + ".", strategy_cites);
    }

    const auto& co = sum->cash_out;
    if (co.status == "none") {
        b.gap(s, "cash_out", "Cash-out", "no exchange deposit was reached");
    } else {
        std::string text = "Deposits reached " + join(co.exchanges, ", ") + " (" + co.status + ").";
        if (!co.candidates.empty()) text += " Other candidate endpoints: " + join(co.candidates, ", ") + ".";
        b.fact(s, "cash_out", "Cash-out", join(co.exchanges, ", ") + " (" + co.status + ")", text, cex_cites);
    }

    const auto& fund = sum->funding;
    if (fund.source) {
        std::vector<std::string> via;
        for (const auto& step : fund.via) via.push_back(step.kind);
        const std::string value = via.empty() ? *fund.source : *fund.source + " via " + join(via, ", ");
        b.fact(s, "funding", "Funding", value, "The primary wallet was funded from " + value + ".", fund.citations);
    } else {
        b.gap(s, "funding", "Funding", "the funding trail did not reach a tagged source");
    }
    return s;
}

Section classification_section(const pipeline::Analysis& a, Builder& b) {
    Section s{"classification", "Classification", {}};
    const auto& c = a.classification;
    std::vector<TxHash> all;
    for (const auto& e : c.evidence)
        for (const auto& h : e.txs) add_unique(all, h);
    std::string text = "Verdict " + std::string(to_string(c.verdict)) + " with " +
                       std::string(to_string(c.confidence)) + " confidence";
    text += c.pump_and_dump ? ", with a pump-and-dump price pattern." : ".";
    b.fact(s, "verdict", "Verdict", std::string(to_string(c.verdict)), text, all);
    for (std::size_t i = 0; i < c.evidence.size(); ++i)
        b.fact(s, "evidence_" + std::to_string(i + 1), "Evidence", c.evidence[i].claim, c.evidence[i].claim,
               c.evidence[i].txs);
    if (a.advance_fee) {
        const auto& f = *a.advance_fee;
        std::vector<std::string> kinds;
        if (f.transfer_fee) kinds.push_back("transfer fee");
        if (f.auto_liquidity) kinds.push_back("automatic liquidity");
        b.quantity(s, "advance_fee", "Advance-fee mechanics", join(kinds, ", "),
                   std::to_string(f.sells_short) + " of " + std::to_string(f.sells_examined) +
                       " sells were taxed (median fee share " + format_rational(f.median_fee_share, 4) + "), " +
                       std::to_string(f.sells_with_liquidity) + " added liquidity in the same transaction.",
                   f.citations, false);
    }
    return s;
}

Section attribution_section(const pipeline::Analysis& a, Builder& b) {
    Section s{"attribution", "Attribution", {}};
    if (!a.attribution.deployer) b.gap(s, "deployer", "Deployer", "the creation transaction is missing");
    for (const auto& [addr, r] : a.attribution.roles) {
        std::vector<std::string> roles;
        for (Role role : r.roles) roles.emplace_back(to_string(role));
        std::string text = addr.hex() + ": " + join(roles, ", ") + " (" + std::string(to_string(r.certainty)) + ")";
        if (!r.rationale.empty()) text += ". " + join(r.rationale, "; ");
        b.fact(s, addr.hex(), "Address", join(roles, ", "), text, r.citations);
    }
    return s;
}

Section victims_section(const pipeline::Analysis& a, Builder& b) {
    Section s{"victims", "Victims", {}};
    if (!a.window) {
        b.gap(s, "count", "Victims", "no scam window");
        return s;
    }
    std::vector<TxHash> cites;
    std::set<Address> cited;
    for (const auto& e : a.timeline.events) {
        std::optional<Address> to;
        if (const auto* buy = e.as<lifecycle::Buy>()) to = buy->buyer;
        else if (const auto* t = e.as<lifecycle::PlainTransfer>()) to = t->to;
        else if (const auto* m = e.as<lifecycle::Minted>()) to = m->to;
        if (to && a.victims.victims.count(*to) && cited.insert(*to).second) add_unique(cites, e.tx_hash);
    }
    const auto n = a.victims.victims.size();
    b.quantity(s, "count", "Victims", std::to_string(n),
               std::to_string(n) + " unattributed addresses held the token when the scam window closed; each is "
                                   "cited by the transaction in which it first acquired the token.",
               cites);
    return s;
}

Section findings_section(const trace::LaunderingSummary* sum, Builder& b) {
    Section s{"laundering_findings", "Laundering findings", {}};
    if (!sum) return s;
    std::size_t i = 0;
    for (const auto& f : sum->findings) {
        ++i;
        std::string value, text;
        bool quant = false;
        std::visit(
            [&](const auto& k) {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, trace::PeelChainFinding>) {
                    std::vector<std::string> hops;
                    for (const auto& h : k.path) hops.push_back(h.hex());
                    value = std::to_string(k.path.size() - 1) + " hops";
                    text = "Peel chain " + join(hops, " -> ") + ".";
                } else if constexpr (std::is_same_v<T, trace::ChainHopFinding>) {
                    value = k.label + ", " + eth_text(k.amount);
                    text = eth_exact(k.amount) + " ETH sent to bridge " + k.label + " (" + k.bridge.hex() + ").";
                    quant = true;
                } else if constexpr (std::is_same_v<T, trace::MixerFinding>) {
                    value = k.label + ", " + eth_text(k.amount);
                    text = eth_exact(k.amount) + " ETH deposited to mixer " + k.label + " (" + k.mixer.hex() + ").";
                    quant = true;
                } else if constexpr (std::is_same_v<T, trace::CexDepositFinding>) {
                    value = k.label + ", " + eth_text(k.amount);
                    text = eth_exact(k.amount) + " ETH deposited to exchange " + k.label + " (" + k.exchange.hex() +
                           "), attribution " + k.attribution + (k.kyc_flag ? ", above the KYC threshold." : ".");
                    quant = true;
                } else if constexpr (std::is_same_v<T, trace::BurnerFinding>) {
                    value = k.address.hex();
                    text = "Burner address " + k.address.hex() + ".";
                } else if constexpr (std::is_same_v<T, trace::GamblingFinding>) {
                    value = k.label + ", " + eth_text(k.amount);
                    text = eth_exact(k.amount) + " ETH sent to gambling service " + k.label + " (" +
                           k.service.hex() + ").";
                    quant = true;
                } else {
                    value = "none";
                    text = "No laundering pattern was found in the traced graph.";
                }
            },
            f.kind);
        const std::string id = std::string(f.name()) + "_" + std::to_string(i);
        if (quant) b.quantity(s, id, std::string(f.name()), value, text, f.citations, false);
        else b.fact(s, id, std::string(f.name()), value, text, f.citations);
    }
    return s;
}

Section contract_section(const pipeline::Analysis& a, Builder& b) {
    Section s{"contract", "Contract analysis", {}};
    if (!a.contract) {
        b.gap(s, "source", "Contract source", "no contract source was provided");
        return s;
    }
    std::size_t i = 0;
    for (const auto& f : a.contract->findings)
        b.fact(s, "finding_" + std::to_string(++i), std::string(to_string(f.kind)),
               "lines " + std::to_string(f.location.line_start) + "-" + std::to_string(f.location.line_end),
               f.detail);
    if (a.contract->findings.empty())
        b.fact(s, "findings", "Findings", "none",
               "No trapdoor pattern was matched; the detectors are heuristic and this is not evidence of safety.");
    return s;
}

Json window_block(const pipeline::Analysis& a) {
    if (!a.window) return Json{{"degenerate", true}};
    const auto& w = *a.window;
    return Json{{"degenerate", w.low_confidence || w.start == w.end},
                {"start", format_utc(w.start_time)},
                {"end", format_utc(w.end_time)},
                {"startBlock", w.start.block},
                {"endBlock", w.end.block},
                {"endReason", to_string(w.end_reason)},
                {"lowConfidence", w.low_confidence}};
}

Json profit_block(const pipeline::Analysis& a) {
    const auto& p = a.profit;
    Json j{{"revenueWei", p.revenue.str()},      {"spendWei", p.spend.str()},
           {"deltaLiquidityWei", p.delta_liquidity.str()},
           {"pMinWei", p.p_min.str()},            {"pMaxWei", p.p_max.str()},
           {"revenueEth", eth_exact(p.revenue)},  {"spendEth", eth_exact(p.spend)},
           {"deltaLiquidityEth", eth_exact(p.delta_liquidity)},
           {"pMinEth", eth_exact(p.p_min)},       {"pMaxEth", eth_exact(p.p_max)}};
    if (p.usd_rate) {
        j["usd"] = Json{{"rate", p.usd_rate_literal ? *p.usd_rate_literal : format_rational(*p.usd_rate, 2)},
                        {"date", *p.usd_date},
                        {"pMin", format_rational(*p.usd(p.p_min), 2)},
                        {"pMax", format_rational(*p.usd(p.p_max), 2)}};
    } else {
        j["usd"] = nullptr;
    }
    Json d = Json::array();
    for (const auto& x : a.discrepancies)
        d.push_back(Json{{"field", x.field}, {"computed", x.computed}, {"published", x.published}});
    j["discrepancies"] = d;
    return j;
}

Json laundering_block(const trace::LaunderingSummary* sum) {
    if (!sum) return nullptr;
    Json j;
    j["strategies"] = sum->strategies;
    j["cashOut"] = Json{{"status", sum->cash_out.status},
                        {"exchanges", sum->cash_out.exchanges},
                        {"candidates", sum->cash_out.candidates}};
    Json via = Json::array();
    for (const auto& step : sum->funding.via) via.push_back(Json{{"address", step.address.hex()}, {"kind", step.kind}});
    j["funding"] = Json{{"source", sum->funding.source ? Json(*sum->funding.source) : Json(nullptr)},
                        {"sourceAddress",
                         sum->funding.source_address ? Json(sum->funding.source_address->hex()) : Json(nullptr)},
                        {"via", via}};
    if (sum->wallet) {
        j["wallet"] = Json{{"address", sum->wallet->address.hex()},
                           {"activeFrom", utc_date(sum->wallet->first_seen)},
                           {"activeTo", utc_date(sum->wallet->last_seen)},
                           {"txCount", sum->wallet->tx_count}};
    } else {
        j["wallet"] = nullptr;
    }
    Json findings = Json::array();
    for (const auto& f : sum->findings) findings.push_back(exporting::finding_json(f));
    j["findings"] = findings;
    return j;
}

Json claim_json(const Claim& c) {
    Json cites = Json::array();
    for (const auto& h : c.citations) cites.push_back(h.hex());
    return Json{{"id", c.id},
                {"label", c.label},
                {"value", c.value ? Json(*c.value) : Json(nullptr)},
                {"text", c.text},
                {"quantitative", c.quantitative},
                {"citations", cites}};
}

const std::regex& address_pattern() {
    static const std::regex re("0x[0-9a-f]{40}(?![0-9a-f])");
    return re;
}

std::string anonymize_text(const std::string& s) {
    std::string out;
    auto begin = std::sregex_iterator(s.begin(), s.end(), address_pattern());
    std::size_t last = 0;
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
        out += s.substr(last, it->position() - last);
        out += anonymized_address(Address::parse(it->str()));
        last = it->position() + it->length();
    }
    return out + s.substr(last);
}

void anonymize_json(Json& j) {
    if (j.is_string()) {
        j = anonymize_text(j.get<std::string>());
    } else if (j.is_structured()) {
        for (auto& v : j) anonymize_json(v);
    }
}

std::string md_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '|' || c == '*' || c == '_' || c == '[' || c == ']') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

}  // namespace

std::string anonymized_address(const Address& a) {
    return "anon-" + keccak256(a.view()).hex().substr(2, 10);
}

std::vector<TxHash> EvidenceReport::citations() const {
    std::set<TxHash> all;
    for (const auto& s : sections)
        for (const auto& c : s.claims) all.insert(c.citations.begin(), c.citations.end());
    return {all.begin(), all.end()};
}

EvidenceReport build_evidence_report(const pipeline::Analysis& a, const trace::TraceGraph* graph,
                                     const trace::LaunderingSummary* summary, const chaindata::ChainStore& store,
                                     const pipeline::SourceInfo& source, const pipeline::Config& config) {
    EvidenceReport r;
    Builder b(a);
    r.token = a.timeline.token.hex();
    if (a.timeline.pair) r.pair = a.timeline.pair->hex();
    r.window = window_block(a);
    r.classification = Json{{"verdict", to_string(a.classification.verdict)},
                            {"pumpAndDump", a.classification.pump_and_dump},
                            {"confidence", to_string(a.classification.confidence)}};
    r.profit = profit_block(a);
    for (const auto& v : a.victims.victims) r.victims.push_back(v.hex());
    r.attribution = Json::array();
    for (const auto& [addr, role] : a.attribution.roles) {
        Json roles = Json::array();
        for (Role x : role.roles) roles.push_back(to_string(x));
        r.attribution.push_back(
            Json{{"address", addr.hex()}, {"roles", roles}, {"certainty", to_string(role.certainty)}});
    }
    const trace::LaunderingSummary* sum = graph ? summary : nullptr;
    r.laundering = laundering_block(sum);
    for (const auto& p : a.prices.points)
        r.prices.push_back({p.timestamp, p.position.block, p.is_buy ? "buy" : "sell", format_scientific(p.price, 6)});

    r.sections.push_back(characteristics(a, b));
    r.sections.push_back(laundering_section(sum, store, b));
    r.sections.push_back(classification_section(a, b));
    r.sections.push_back(attribution_section(a, b));
    r.sections.push_back(victims_section(a, b));
    r.sections.push_back(findings_section(sum, b));
    r.sections.push_back(contract_section(a, b));
    r.gaps = b.gaps();

    r.provenance.version = RUGTRACE_VERSION;
    r.provenance.source = source;
    r.provenance.thresholds = exporting::config_json(config);
    if (config.anonymize) anonymize(r);
    return r;
}

void anonymize(EvidenceReport& r) {
    r.token = anonymize_text(r.token);
    if (r.pair) r.pair = anonymize_text(*r.pair);
    for (Json* j : {&r.window, &r.classification, &r.profit, &r.attribution, &r.laundering, &r.provenance.thresholds})
        anonymize_json(*j);
    for (auto& v : r.victims) v = anonymize_text(v);
    for (auto& s : r.sections) {
        for (auto& c : s.claims) {
            c.id = anonymize_text(c.id);
            c.text = anonymize_text(c.text);
            if (c.value) c.value = anonymize_text(*c.value);
        }
    }
}

Json to_json(const EvidenceReport& r) {
    Json j{{"schemaVersion", r.schema_version}, {"token", r.token}};
    j["pair"] = r.pair ? Json(*r.pair) : Json(nullptr);
    j["window"] = r.window;
    j["classification"] = r.classification;
    j["profit"] = r.profit;
    j["victims"] = r.victims;
    j["attribution"] = r.attribution;
    j["laundering"] = r.laundering;
    Json prices = Json::array();
    for (const auto& p : r.prices)
        prices.push_back(Json{{"timestamp", p.timestamp}, {"block", p.block}, {"side", p.side}, {"priceEth", p.price_eth}});
    j["priceSeries"] = prices;
    Json sections = Json::array();
    for (const auto& s : r.sections) {
        Json claims = Json::array();
        for (const auto& c : s.claims) claims.push_back(claim_json(c));
        sections.push_back(Json{{"id", s.id}, {"title", s.title}, {"claims", claims}});
    }
    j["sections"] = sections;
    Json gaps = Json::array();
    for (const auto& g : r.gaps) gaps.push_back(Json{{"field", g.field}, {"reason", g.reason}});
    j["gaps"] = gaps;
    j["provenance"] = Json{{"tool", r.provenance.tool},
                           {"version", r.provenance.version},
                           {"source", Json{{"kind", r.provenance.source.kind},
                                           {"digest", "keccak256:" + r.provenance.source.digest.substr(2)}}},
                           {"thresholds", r.provenance.thresholds}};
    return j;
}

std::string render_markdown(const EvidenceReport& r) {
    std::ostringstream md;
    std::vector<const Claim*> noted;
    const auto cite = [&](const Claim& c) -> std::string {
        if (c.citations.empty()) return "";
        noted.push_back(&c);
        return " [^" + std::to_string(noted.size()) + "]";
    };
    md << "# Evidence report: " << r.token << "\n\n";
    md << "- Schema version: " << r.schema_version << "\n";
    md << "- Pair: " << (r.pair ? *r.pair : "NOT DETERMINED") << "\n";
    if (r.window.value("degenerate", false)) {
        md << "- Scam window: NOT DETERMINED (no activity)\n";
    } else {
        md << "- Scam window: " << r.window["start"].get<std::string>() << " to " << r.window["end"].get<std::string>()
           << " (blocks " << r.window["startBlock"].get<std::uint64_t>() << " to "
           << r.window["endBlock"].get<std::uint64_t>() << ")\n";
    }
    md << "- Verdict: " << r.classification["verdict"].get<std::string>()
       << ", pump and dump: " << (r.classification["pumpAndDump"].get<bool>() ? "yes" : "no")
       << ", confidence: " << r.classification["confidence"].get<std::string>() << "\n\n";

    for (const auto& s : r.sections) {
        md << "## " << s.title << "\n\n";
        if (s.claims.empty()) md << "Nothing to report.\n\n";
        for (const auto& c : s.claims) {
            md << "- **" << md_escape(c.label) << "**: ";
            if (!c.value) {
                md << "NOT DETERMINED (" << c.text << ")\n";
                continue;
            }
            md << md_escape(*c.value) << ". " << md_escape(c.text) << cite(c) << "\n";
        }
        md << "\n";
    }

    md << "## Victims\n\n";
    if (r.victims.empty()) md << "None identified.\n";
    for (const auto& v : r.victims) md << "- " << v << "\n";
    md << "\n## Price series\n\n";
    if (r.prices.empty()) {
        md << "NOT DETERMINED (no swaps)\n";
    } else {
        md << "| Time (UTC) | Block | Side | Price (ETH) |\n|---|---|---|---|\n";
        for (const auto& p : r.prices)
            md << "| " << format_utc(p.timestamp) << " | " << p.block << " | " << p.side << " | " << p.price_eth
               << " |\n";
    }
    md << "\n## Gaps\n\n";
    if (r.gaps.empty()) md << "None.\n";
    for (const auto& g : r.gaps) md << "- " << g.field << ": NOT DETERMINED (" << g.reason << ")\n";

    md << "\n## Provenance\n\n";
    md << "- Tool: " << r.provenance.tool << " " << r.provenance.version << "\n";
    md << "- Source: " << r.provenance.source.kind << ", keccak256:" << r.provenance.source.digest.substr(2) << "\n";
    md << "- Thresholds:\n";
    for (const auto& [group, values] : r.provenance.thresholds.items()) {
        if (!values.is_object()) {
            md << "  - " << group << ": " << values.dump() << "\n";
            continue;
        }
        for (const auto& [k, v] : values.items()) md << "  - " << group << "." << k << ": " << v.dump() << "\n";
    }

    if (!noted.empty()) {
        md << "\n## Citations\n\n";
        for (std::size_t i = 0; i < noted.size(); ++i) {
            std::vector<std::string> hs;
            for (const auto& h : noted[i]->citations) hs.push_back(h.hex());
            md << "[^" << i + 1 << "]: " << join(hs, ", ") << "\n";
        }
    }
    return md.str();
}

std::string render(const EvidenceReport& r, const std::string& format) {
    if (format == "json") return exporting::dump(to_json(r));
    if (format == "md") return render_markdown(r);
    throw ConfigError("unknown report format '" + format + "' (expected json or md)");
}

}  // namespace rugtrace::report
