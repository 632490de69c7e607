#include "rugtrace/export.hpp"

#include "rugtrace/errors.hpp"

namespace rugtrace::exporting {

namespace {

using lifecycle::TokenEvent;

Json tx_list(const std::vector<TxHash>& txs) {
    Json arr = Json::array();
    for (const auto& h : txs) arr.push_back(h.hex());
    return arr;
}

Json warnings_json(const std::vector<Warning>& ws) {
    Json arr = Json::array();
    for (const auto& w : ws) {
        Json j{{"code", w.code}, {"message", w.message}};
        j["tx"] = w.tx ? Json(w.tx->hex()) : Json(nullptr);
        arr.push_back(j);
    }
    return arr;
}

Json window_json(const std::optional<lifecycle::ScamWindow>& w) {
    if (!w) return nullptr;
    return Json{{"start", position_json(w->start)},
                {"end", position_json(w->end)},
                {"startTime", format_utc(w->start_time)},
                {"endTime", format_utc(w->end_time)},
                {"startTimestamp", w->start_time},
                {"endTimestamp", w->end_time},
                {"endReason", to_string(w->end_reason)},
                {"lowConfidence", w->low_confidence}};
}

Json event_json(const TokenEvent& e, std::size_t index) {
    Json j{{"index", index},
           {"position", position_json(e.position)},
           {"timestamp", e.timestamp},
           {"time", format_utc(e.timestamp)},
           {"tx", e.tx_hash.hex()},
           {"kind", std::string(lifecycle::event_name(e.kind))}};
    Json participants = Json::object();
    Json amounts = Json::object();
    std::visit(
        [&](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, lifecycle::Created>) {
                participants["creator"] = k.creator.hex();
            } else if constexpr (std::is_same_v<T, lifecycle::Minted>) {
                participants["to"] = k.to.hex();
                amounts["amount"] = k.amount.str();
            } else if constexpr (std::is_same_v<T, lifecycle::LiquidityAdded>) {
                participants["provider"] = k.provider.hex();
                amounts["ethIn"] = k.eth_in.str();
                amounts["tokensIn"] = k.tokens_in.str();
            } else if constexpr (std::is_same_v<T, lifecycle::Buy>) {
                participants["buyer"] = k.buyer.hex();
                amounts["ethIn"] = k.eth_in.str();
                amounts["tokensOut"] = k.tokens_out.str();
            } else if constexpr (std::is_same_v<T, lifecycle::Sell>) {
                participants["seller"] = k.seller.hex();
                amounts["tokensIn"] = k.tokens_in.str();
                amounts["ethOut"] = k.eth_out.str();
            } else if constexpr (std::is_same_v<T, lifecycle::LiquidityRemoved>) {
                participants["recipient"] = k.recipient.hex();
                amounts["ethOut"] = k.eth_out.str();
                amounts["tokensOut"] = k.tokens_out.str();
            } else {
                participants["from"] = k.from.hex();
                participants["to"] = k.to.hex();
                amounts["amount"] = k.amount.str();
            }
        },
        e.kind);
    participants["txSender"] = e.tx_sender.hex();
    j["participants"] = participants;
    j["amounts"] = amounts;
    return j;
}

Json price_json(const lifecycle::PricePoint& p) {
    return Json{{"position", position_json(p.position)},
                {"timestamp", p.timestamp},
                {"tx", p.tx_hash.hex()},
                {"side", p.is_buy ? "buy" : "sell"},
                {"trader", p.trader.hex()},
                {"ethWei", p.eth.str()},
                {"tokens", p.tokens.str()},
                {"priceEth", format_scientific(p.price, 6)}};
}

Json pump_json(const std::optional<frauddetect::PumpFinding>& p) {
    if (!p) return nullptr;
    Json peaks = Json::array();
    for (const auto& s : p->secondary_peaks) peaks.push_back(price_json(s));
    return Json{{"first", price_json(p->first)},
                {"peak", price_json(p->peak)},
                {"last", price_json(p->last)},
                {"riseFactor", format_scientific(p->rise_factor, 6)},
                {"collapseShare", format_rational(p->collapse_factor, 4)},
                {"secondaryPeaks", peaks}};
}

std::optional<Role> parse_role(const std::string& s) {
    for (Role r : {Role::deployer, Role::deployer_funder, Role::liquidity_provider, Role::liquidity_remover,
                   Role::top_seller, Role::suspected_collusion, Role::victim_candidate, Role::degen_candidate})
        if (to_string(r) == s) return r;
    return std::nullopt;
}

Json opt_time(const std::optional<std::int64_t>& t) { return t ? Json(*t) : Json(nullptr); }

Position position_from(const Json& j) {
    return {j.at("block").get<std::uint64_t>(), j.at("txIndex").get<std::uint32_t>(),
            j.at("logIndex").get<std::int64_t>()};
}

Json trace_config_json(const trace::TraceConfig& c) {
    return Json{{"maxDepth", c.max_depth},
                {"dustWei", c.dust_threshold.str()},
                {"anchor", opt_time(c.anchor)},
                {"highActivityWindowSeconds", c.high_activity_window},
                {"highActivityTxCount", c.high_activity_tx_count},
                {"includeTokenFlows", c.include_token_flows}};
}

trace::TraceConfig trace_config_from(const Json& j) {
    trace::TraceConfig c;
    c.max_depth = j.at("maxDepth").get<unsigned>();
    c.dust_threshold = parse_amount(j.at("dustWei").get<std::string>());
    if (!j.at("anchor").is_null()) c.anchor = j.at("anchor").get<std::int64_t>();
    c.high_activity_window = j.at("highActivityWindowSeconds").get<std::int64_t>();
    c.high_activity_tx_count = j.at("highActivityTxCount").get<std::size_t>();
    c.include_token_flows = j.at("includeTokenFlows").get<bool>();
    return c;
}

}  // namespace

std::string rational_str(const Rational& r) {
    const Amount num = boost::multiprecision::numerator(r);
    const Amount den = boost::multiprecision::denominator(r);
    return den == 1 ? num.str() : num.str() + "/" + den.str();
}

Rational parse_rational(const std::string& s) {
    const auto slash = s.find('/');
    const auto parse_signed = [](std::string_view v) {
        if (!v.empty() && v[0] == '-') return Amount(-parse_amount(v.substr(1)));
        return parse_amount(v);
    };
    if (slash == std::string::npos) {
        const auto dot = s.find('.');
        if (dot == std::string::npos) return Rational(parse_signed(s));
        const std::string frac = s.substr(dot + 1);
        const Amount scale = pow10(static_cast<unsigned>(frac.size()));
        const bool neg = !s.empty() && s[0] == '-';
        Amount whole = parse_amount(s.substr(neg ? 1 : 0, dot - (neg ? 1 : 0)));
        Amount v = whole * scale + (frac.empty() ? Amount(0) : parse_amount(frac));
        return Rational(neg ? Amount(-v) : v, scale);
    }
    const Amount den = parse_amount(s.substr(slash + 1));
    if (den == 0) throw ParseError("zero denominator in '" + s + "'");
    return Rational(parse_signed(s.substr(0, slash)), den);
}

std::string format_rational(const Rational& value, unsigned places) {
    const Amount scale = pow10(places);
    const bool negative = value < 0;
    const Rational mag = negative ? Rational(-value) : value;
    const Rational scaled = mag * scale;
    const Amount num = boost::multiprecision::numerator(scaled);
    const Amount den = boost::multiprecision::denominator(scaled);
    Amount q = num / den;
    if ((num % den) * 2 >= den) q += 1;
    return format_scaled(negative ? Amount(-q) : q, places, places);
}

std::string eth_exact(const Amount& wei) {
    std::string s = format_eth(wei, 18);
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s == "-0" ? "0" : s;
}

Json position_json(const Position& p) {
    return Json{{"block", p.block}, {"txIndex", p.tx_index}, {"logIndex", p.log_index}};
}

Json timeline_json(const pipeline::Analysis& a) {
    const auto& tl = a.timeline;
    Json j{{"schemaVersion", kSchemaVersion}, {"token", tl.token.hex()}};
    j["pair"] = tl.pair ? Json(tl.pair->hex()) : Json(nullptr);
    j["quote"] = tl.quote.hex();
    j["decimals"] = tl.decimals;
    j["window"] = window_json(a.window);
    j["stats"] = Json{{"transfers", tl.transfer_count},
                      {"uniqueAddresses", tl.unique_addresses()},
                      {"remainingHolders", tl.remaining_holders()}};
    Json events = Json::array();
    for (std::size_t i = 0; i < tl.events.size(); ++i) events.push_back(event_json(tl.events[i], i));
    j["events"] = events;
    Json prices = Json::array();
    for (const auto& p : a.prices.points) prices.push_back(price_json(p));
    j["prices"] = prices;
    Json reserves = Json::array();
    for (const auto& r : tl.reserves)
        reserves.push_back(Json{{"position", position_json(r.position)},
                                {"timestamp", r.timestamp},
                                {"tx", r.tx_hash.hex()},
                                {"ethReserveWei", r.eth_reserve.str()},
                                {"tokenReserve", r.token_reserve.str()}});
    j["reserves"] = reserves;
    Json holders = Json::array();
    for (const auto& [addr, bal] : tl.holders_final)
        holders.push_back(Json{{"address", addr.hex()}, {"balance", bal.str()}});
    j["holdersFinal"] = holders;
    std::vector<Warning> ws = tl.warnings;
    ws.insert(ws.end(), a.prices.warnings.begin(), a.prices.warnings.end());
    j["warnings"] = warnings_json(ws);
    return j;
}

Json contract_json(const std::optional<contractcheck::ScanResult>& scan) {
    if (!scan) return Json{{"status", "not_provided"}};
    Json findings = Json::array();
    for (const auto& f : scan->findings)
        findings.push_back(Json{{"kind", to_string(f.kind)},
                                {"lineStart", f.location.line_start},
                                {"lineEnd", f.location.line_end},
                                {"offset", f.location.offset},
                                {"length", f.location.length},
                                {"excerpt", f.excerpt},
                                {"detail", f.detail}});
    return Json{{"status", "scanned"},
                {"verified", scan->verified},
                {"lexicalOnly", scan->lexical_only},
                {"findings", findings},
                {"warnings", warnings_json(scan->warnings)}};
}

Json verdict_json(const pipeline::Analysis& a) {
    Json j{{"schemaVersion", kSchemaVersion}, {"token", a.timeline.token.hex()}};
    const auto& c = a.classification;
    Json evidence = Json::array();
    for (const auto& e : c.evidence) evidence.push_back(Json{{"claim", e.claim}, {"txs", tx_list(e.txs)}});
    j["classification"] = Json{{"verdict", to_string(c.verdict)},
                               {"pumpAndDump", c.pump_and_dump},
                               {"confidence", to_string(c.confidence)},
                               {"pump", pump_json(c.pump)},
                               {"notes", c.notes}};
    j["window"] = window_json(a.window);

    const auto& p = a.profit;
    Json profit{{"revenueWei", p.revenue.str()},
                {"spendWei", p.spend.str()},
                {"deltaLiquidityWei", p.delta_liquidity.str()},
                {"pMinWei", p.p_min.str()},
                {"pMaxWei", p.p_max.str()},
                {"revenueEth", eth_exact(p.revenue)},
                {"spendEth", eth_exact(p.spend)},
                {"deltaLiquidityEth", eth_exact(p.delta_liquidity)},
                {"pMinEth", eth_exact(p.p_min)},
                {"pMaxEth", eth_exact(p.p_max)},
                {"liquidityProvidedWei", a.rsl.liquidity_provided.str()},
                {"liquidityRemovedWei", a.rsl.liquidity_removed.str()}};
    if (p.usd_rate) {
        profit["usd"] = Json{{"rate", p.usd_rate_literal ? *p.usd_rate_literal : format_rational(*p.usd_rate, 2)},
                             {"date", *p.usd_date},
                             {"pMin", format_rational(*p.usd(p.p_min), 2)},
                             {"pMax", format_rational(*p.usd(p.p_max), 2)}};
    } else {
        profit["usd"] = nullptr;
    }
    profit["drainExitTx"] = a.rsl.drain_exit_tx ? Json(a.rsl.drain_exit_tx->hex()) : Json(nullptr);
    profit["citations"] = Json{{"revenue", tx_list(a.rsl.revenue_txs)},
                               {"spend", tx_list(a.rsl.spend_txs)},
                               {"liquidity", tx_list(a.rsl.liquidity_txs)}};
    profit["warnings"] = warnings_json(a.rsl.warnings);
    Json discrepancies = Json::array();
    for (const auto& d : a.discrepancies)
        discrepancies.push_back(Json{{"field", d.field}, {"computed", d.computed}, {"published", d.published}});
    profit["discrepancies"] = discrepancies;
    j["profit"] = profit;

    Json victims = Json::array();
    for (const auto& v : a.victims.victims) victims.push_back(v.hex());
    j["victims"] = victims;
    Json excluded = Json::array();
    for (const auto& [addr, reason] : a.victims.excluded)
        excluded.push_back(Json{{"address", addr.hex()}, {"reason", to_string(reason)}});
    j["excluded"] = excluded;

    if (a.advance_fee) {
        const auto& f = *a.advance_fee;
        j["advanceFee"] = Json{{"transferFee", f.transfer_fee},
                               {"autoLiquidity", f.auto_liquidity},
                               {"sellsExamined", f.sells_examined},
                               {"sellsShort", f.sells_short},
                               {"sellsWithLiquidity", f.sells_with_liquidity},
                               {"medianFeeShare", format_rational(f.median_fee_share, 4)},
                               {"citations", tx_list(f.citations)}};
    } else {
        j["advanceFee"] = nullptr;
    }
    j["evidence"] = evidence;
    j["contract_analysis"] = contract_json(a.contract);
    return j;
}

Json attribution_json(const pipeline::Analysis& a) {
    const auto& at = a.attribution;
    Json j{{"schemaVersion", kSchemaVersion}, {"token", a.timeline.token.hex()}};
    j["deployer"] = at.deployer ? Json(at.deployer->hex()) : Json(nullptr);
    Json addresses = Json::array();
    for (const auto& [addr, r] : at.roles) {
        Json roles = Json::array();
        for (Role role : r.roles) roles.push_back(to_string(role));
        addresses.push_back(Json{{"address", addr.hex()},
                                 {"roles", roles},
                                 {"certainty", to_string(r.certainty)},
                                 {"rationale", r.rationale},
                                 {"citations", tx_list(r.citations)}});
    }
    j["addresses"] = addresses;
    Json certain = Json::array();
    for (const auto& c : at.certain()) certain.push_back(c.hex());
    Json suspected = Json::array();
    for (const auto& s : at.suspected()) suspected.push_back(s.hex());
    j["certain"] = certain;
    j["suspected"] = suspected;
    j["warnings"] = warnings_json(at.warnings);
    return j;
}

Json config_json(const pipeline::Config& c) {
    Json j;
    j["lifecycle"] = Json{{"weth", c.lifecycle.weth.hex()}, {"drainShare", rational_str(c.lifecycle.drain_share)}};
    j["fraud"] = Json{{"drainShare", rational_str(c.fraud.drain_share)},
                      {"sellClusterShare", rational_str(c.fraud.sell_cluster_share)},
                      {"pumpRise", rational_str(c.fraud.pump.rise)},
                      {"pumpCollapse", rational_str(c.fraud.pump.collapse)},
                      {"advanceFeeShare", rational_str(c.fraud.advance_fee_share)},
                      {"rslAllAddresses", c.fraud.rsl_all_addresses}};
    const auto& h = c.heuristics;
    j["heuristics"] = Json{{"topSellerEpsilon", rational_str(h.top_seller_epsilon)},
                           {"spikeShare", rational_str(h.spike_share)},
                           {"spikeFollowupSeconds", h.spike_followup},
                           {"funderDepth", h.funder_depth},
                           {"funderMaxTxCount", h.funder_max_tx_count},
                           {"funderLookbackSeconds", opt_time(h.funder_lookback)},
                           {"degenTokenCount", h.degen_token_count}};
    j["trace"] = trace_config_json(c.trace);
    const auto& s = c.summary;
    j["summary"] = Json{{"peelMinHops", s.peel.min_hops},
                        {"peelForwardShare", rational_str(s.peel.forward_share)},
                        {"peelMaxHopTxCount", s.peel.max_hop_tx_count},
                        {"peelMaxHopDelaySeconds", s.peel.max_hop_delay},
                        {"peelMaxPaths", s.peel.max_paths},
                        {"burnerMaxLifetimeTx", s.burner.max_lifetime_tx},
                        {"burnerInactivitySeconds", s.burner.inactivity_horizon},
                        {"kycThresholdWei", s.kyc_threshold.str()},
                        {"fundingMaxDepth", s.funding_max_depth}};
    if (c.published) {
        j["published"] = Json{{"pMin", c.published->p_min ? Json(*c.published->p_min) : Json(nullptr)},
                              {"pMax", c.published->p_max ? Json(*c.published->p_max) : Json(nullptr)}};
    } else {
        j["published"] = nullptr;
    }
    j["anonymize"] = c.anonymize;
    return j;
}

pipeline::Config config_from_json(const Json& j) {
    pipeline::Config c;
    try {
        const auto rat = [](const Json& v) { return parse_rational(v.get<std::string>()); };
        const auto& l = j.at("lifecycle");
        c.lifecycle.weth = Address::parse(l.at("weth").get<std::string>());
        c.lifecycle.drain_share = rat(l.at("drainShare"));
        const auto& f = j.at("fraud");
        c.fraud.drain_share = rat(f.at("drainShare"));
        c.fraud.sell_cluster_share = rat(f.at("sellClusterShare"));
        c.fraud.pump.rise = rat(f.at("pumpRise"));
        c.fraud.pump.collapse = rat(f.at("pumpCollapse"));
        c.fraud.advance_fee_share = rat(f.at("advanceFeeShare"));
        c.fraud.rsl_all_addresses = f.at("rslAllAddresses").get<bool>();
        const auto& h = j.at("heuristics");
        c.heuristics.top_seller_epsilon = rat(h.at("topSellerEpsilon"));
        c.heuristics.spike_share = rat(h.at("spikeShare"));
        c.heuristics.spike_followup = h.at("spikeFollowupSeconds").get<std::int64_t>();
        c.heuristics.funder_depth = h.at("funderDepth").get<unsigned>();
        c.heuristics.funder_max_tx_count = h.at("funderMaxTxCount").get<std::size_t>();
        if (!h.at("funderLookbackSeconds").is_null())
            c.heuristics.funder_lookback = h.at("funderLookbackSeconds").get<std::int64_t>();
        c.heuristics.degen_token_count = h.at("degenTokenCount").get<std::size_t>();
        c.trace = trace_config_from(j.at("trace"));
        const auto& s = j.at("summary");
        c.summary.peel.min_hops = s.at("peelMinHops").get<std::size_t>();
        c.summary.peel.forward_share = rat(s.at("peelForwardShare"));
        c.summary.peel.max_hop_tx_count = s.at("peelMaxHopTxCount").get<std::size_t>();
        c.summary.peel.max_hop_delay = s.at("peelMaxHopDelaySeconds").get<std::int64_t>();
        c.summary.peel.max_paths = s.at("peelMaxPaths").get<std::size_t>();
        c.summary.burner.max_lifetime_tx = s.at("burnerMaxLifetimeTx").get<std::size_t>();
        c.summary.burner.inactivity_horizon = s.at("burnerInactivitySeconds").get<std::int64_t>();
        c.summary.kyc_threshold = parse_amount(s.at("kycThresholdWei").get<std::string>());
        c.summary.funding_max_depth = s.at("fundingMaxDepth").get<unsigned>();
        if (!j.at("published").is_null()) {
            frauddetect::PublishedFigures p;
            const auto& pj = j.at("published");
            if (!pj.at("pMin").is_null()) p.p_min = pj.at("pMin").get<std::string>();
            if (!pj.at("pMax").is_null()) p.p_max = pj.at("pMax").get<std::string>();
            c.published = p;
        }
        c.anonymize = j.at("anonymize").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid config: ") + e.what());
    }
    return c;
}

Json finding_json(const trace::LaunderingFinding& f) {
    Json j{{"kind", std::string(f.name())}};
    std::visit(
        [&](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, trace::PeelChainFinding>) {
                Json path = Json::array();
                for (const auto& a : k.path) path.push_back(a.hex());
                j["path"] = path;
            } else if constexpr (std::is_same_v<T, trace::ChainHopFinding>) {
                j["bridge"] = k.bridge.hex();
                j["label"] = k.label;
                j["amountWei"] = k.amount.str();
            } else if constexpr (std::is_same_v<T, trace::MixerFinding>) {
                j["mixer"] = k.mixer.hex();
                j["label"] = k.label;
                j["amountWei"] = k.amount.str();
            } else if constexpr (std::is_same_v<T, trace::CexDepositFinding>) {
                j["exchange"] = k.exchange.hex();
                j["label"] = k.label;
                j["amountWei"] = k.amount.str();
                j["kycFlag"] = k.kyc_flag;
                j["attribution"] = k.attribution;
            } else if constexpr (std::is_same_v<T, trace::BurnerFinding>) {
                j["address"] = k.address.hex();
            } else if constexpr (std::is_same_v<T, trace::GamblingFinding>) {
                j["service"] = k.service.hex();
                j["label"] = k.label;
                j["amountWei"] = k.amount.str();
            }
        },
        f.kind);
    j["citations"] = tx_list(f.citations);
    return j;
}

Json trace_json(const trace::TraceGraph& g, const trace::LaunderingSummary* summary) {
    Json j{{"schemaVersion", kSchemaVersion}, {"config", trace_config_json(g.config)}};
    Json seeds = Json::array();
    for (const auto& s : g.seeds) seeds.push_back(s.hex());
    Json frontier = Json::array();
    for (const auto& f : g.frontier) frontier.push_back(f.hex());
    j["seeds"] = seeds;
    j["frontier"] = frontier;
    j["observedUntil"] = g.observed_until;
    Json nodes = Json::array();
    for (const auto& [addr, n] : g.nodes) {
        Json roles = Json::array();
        for (Role r : n.roles) roles.push_back(to_string(r));
        Json tag = nullptr;
        if (n.tag) tag = Json{{"category", to_string(n.tag->category)}, {"label", n.tag->label}};
        nodes.push_back(Json{{"address", addr.hex()},
                             {"tag", tag},
                             {"roles", roles},
                             {"txCount", n.tx_count},
                             {"firstSeen", n.first_seen},
                             {"lastSeen", n.last_seen},
                             {"lifetimeSeconds", n.last_seen - n.first_seen},
                             {"peakBalanceWei", n.peak_balance.str()},
                             {"depth", n.depth},
                             {"seed", n.seed},
                             {"terminal", n.terminal},
                             {"expanded", n.expanded},
                             {"frontier", g.frontier.count(addr) > 0},
                             {"highActivity", n.high_activity},
                             {"historyMissing", n.history_missing},
                             {"inflowWei", n.inflow.str()},
                             {"outflowWei", n.outflow.str()},
                             {"untracedInflowWei", n.untraced_inflow.str()},
                             {"untracedOutflowWei", n.untraced_outflow.str()},
                             {"netChangeWei", n.net_change.str()},
                             {"followFrom", opt_time(n.follow_from)},
                             {"followUntil", opt_time(n.follow_until)}});
    }
    j["nodes"] = nodes;
    Json edges = Json::array();
    for (const auto& [key, e] : g.edges) {
        Json flows = Json::array();
        for (const auto& f : e.token_flows)
            flows.push_back(Json{{"token", f.token.hex()}, {"amount", f.amount.str()}, {"count", f.count}});
        edges.push_back(Json{{"from", e.from.hex()},
                             {"to", e.to.hex()},
                             {"totalWei", e.total.str()},
                             {"txCount", e.tx_count},
                             {"first", position_json(e.first)},
                             {"last", position_json(e.last)},
                             {"firstTime", e.first_time},
                             {"lastTime", e.last_time},
                             {"citations", tx_list(e.citations)},
                             {"tokenFlows", flows}});
    }
    j["edges"] = edges;
    if (summary) {
        Json findings = Json::array();
        for (const auto& f : summary->findings) findings.push_back(finding_json(f));
        j["findings"] = findings;
    } else {
        j["findings"] = nullptr;
    }
    return j;
}

trace::TraceGraph trace_from_json(const Json& j) {
    trace::TraceGraph g;
    try {
        g.config = trace_config_from(j.at("config"));
        for (const auto& s : j.at("seeds")) g.seeds.insert(Address::parse(s.get<std::string>()));
        for (const auto& f : j.at("frontier")) g.frontier.insert(Address::parse(f.get<std::string>()));
        g.observed_until = j.at("observedUntil").get<std::int64_t>();
        for (const auto& nj : j.at("nodes")) {
            trace::NodeInfo n;
            n.address = Address::parse(nj.at("address").get<std::string>());
            if (!nj.at("tag").is_null()) {
                const auto cat = chaindata::parse_tag_category(nj.at("tag").at("category").get<std::string>());
                if (!cat) throw ParseError("unknown tag category on node " + n.address.hex());
                n.tag = chaindata::AddressTag{n.address, *cat, nj.at("tag").at("label").get<std::string>()};
            }
            for (const auto& r : nj.at("roles")) {
                const auto role = parse_role(r.get<std::string>());
                if (!role) throw ParseError("unknown role '" + r.get<std::string>() + "'");
                n.roles.insert(*role);
            }
            n.tx_count = nj.at("txCount").get<std::size_t>();
            n.first_seen = nj.at("firstSeen").get<std::int64_t>();
            n.last_seen = nj.at("lastSeen").get<std::int64_t>();
            n.peak_balance = parse_amount(nj.at("peakBalanceWei").get<std::string>());
            n.depth = nj.at("depth").get<unsigned>();
            n.seed = nj.at("seed").get<bool>();
            n.terminal = nj.at("terminal").get<bool>();
            n.expanded = nj.at("expanded").get<bool>();
            n.high_activity = nj.at("highActivity").get<bool>();
            n.history_missing = nj.at("historyMissing").get<bool>();
            const auto amt = [&](const char* k) {
                const auto s = nj.at(k).get<std::string>();
                if (!s.empty() && s[0] == '-') return Amount(-parse_amount(s.substr(1)));
                return parse_amount(s);
            };
            n.inflow = amt("inflowWei");
            n.outflow = amt("outflowWei");
            n.untraced_inflow = amt("untracedInflowWei");
            n.untraced_outflow = amt("untracedOutflowWei");
            n.net_change = amt("netChangeWei");
            if (!nj.at("followFrom").is_null()) n.follow_from = nj.at("followFrom").get<std::int64_t>();
            if (!nj.at("followUntil").is_null()) n.follow_until = nj.at("followUntil").get<std::int64_t>();
            g.nodes.emplace(n.address, std::move(n));
        }
        for (const auto& ej : j.at("edges")) {
            trace::Edge e;
            e.from = Address::parse(ej.at("from").get<std::string>());
            e.to = Address::parse(ej.at("to").get<std::string>());
            if (!g.nodes.count(e.from) || !g.nodes.count(e.to))
                throw ParseError("edge " + e.from.hex() + " -> " + e.to.hex() + " references an unknown node");
            e.total = parse_amount(ej.at("totalWei").get<std::string>());
            e.tx_count = ej.at("txCount").get<std::size_t>();
            e.first = position_from(ej.at("first"));
            e.last = position_from(ej.at("last"));
            e.first_time = ej.at("firstTime").get<std::int64_t>();
            e.last_time = ej.at("lastTime").get<std::int64_t>();
            for (const auto& h : ej.at("citations")) e.citations.push_back(TxHash::parse(h.get<std::string>()));
            if (e.citations.empty()) throw ParseError("edge " + e.from.hex() + " -> " + e.to.hex() + " has no citations");
            for (const auto& fj : ej.at("tokenFlows"))
                e.token_flows.push_back({Address::parse(fj.at("token").get<std::string>()),
                                         parse_amount(fj.at("amount").get<std::string>()),
                                         fj.at("count").get<std::size_t>()});
            g.edges.emplace(std::make_pair(e.from, e.to), std::move(e));
        }
        for (const auto& s : g.seeds)
            if (!g.nodes.count(s)) throw ParseError("seed " + s.hex() + " is not a node");
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid trace graph: ") + e.what());
    }
    return g;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace rugtrace::exporting
