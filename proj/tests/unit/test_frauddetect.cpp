#include "doctest.h"
#include "fixture_util.hpp"
#include "rugtrace/frauddetect.hpp"
#include "rugtrace/heuristics.hpp"

using namespace rugtrace;
using namespace rugtrace::lifecycle;

namespace {

struct Analysed {
    chaindata::ChainStore store;
    TokenTimeline timeline;
    heuristics::Attribution attribution;
};

Analysed analyse(const std::string& name) {
    Analysed a{testutil::load(name), {}, {}};
    a.timeline = build_timeline(testutil::addr(testutil::expected(name)["token"]), a.store);
    a.attribution = heuristics::attribute_scammer_addresses(a.timeline, a.store);
    return a;
}

Amount wei(const std::string& eth) {
    const auto dot = eth.find('.');
    std::string frac = dot == std::string::npos ? "" : eth.substr(dot + 1);
    const std::string whole = eth.substr(0, dot);
    frac.resize(18, '0');
    return parse_amount(whole) * wei_per_eth() + parse_amount(frac);
}

PricePoint point(int i, bool buy, const char* trader, Rational price) {
    PricePoint p;
    p.position = {static_cast<std::uint64_t>(100 + i), 0, 0};
    p.timestamp = 1'600'000'000 + i;
    p.is_buy = buy;
    p.trader = Address::parse(trader);
    p.price = price;
    return p;
}

}  // namespace

TEST_CASE("fig2 fixture: lifecycle, verdict and victims") {
    const auto exp = testutil::expected("fig2");
    const auto a = analyse("fig2");
    std::vector<std::string> kinds;
    for (const auto& e : a.timeline.events) kinds.emplace_back(event_name(e.kind));
    CHECK(kinds == exp["events"].get<std::vector<std::string>>());

    const auto deployer = testutil::addr(exp["deployer"]);
    const auto& role = a.attribution.roles.at(deployer);
    CHECK(role.has(Role::deployer));
    CHECK(role.has(Role::liquidity_provider));
    CHECK(role.has(Role::liquidity_remover));
    CHECK(role.certainty == Certainty::certain);

    const auto c = frauddetect::classify_rug_pull(a.timeline, a.attribution.roles);
    CHECK(frauddetect::to_string(c.verdict) == exp["verdict"].get<std::string>());
    CHECK(c.pump_and_dump == exp["pump_and_dump"].get<bool>());
    CHECK(c.confidence == frauddetect::Confidence::high);
    for (const auto& ev : c.evidence) {
        CHECK_FALSE(ev.txs.empty());
        for (const auto& h : ev.txs) CHECK(a.store.find_tx(h) != nullptr);
    }

    const auto window = detect_scam_window(a.timeline);
    const auto v = frauddetect::identify_victims(a.timeline, a.attribution.roles, window);
    std::vector<std::string> victims;
    for (const auto& x : v.victims) victims.push_back(x.hex());
    CHECK(victims == exp["victims"].get<std::vector<std::string>>());
}

TEST_CASE("victims never sold before the window closed") {
    for (const std::string name : {"fig2", "token1", "token2", "token3", "token4", "token5"}) {
        CAPTURE(name);
        const auto a = analyse(name);
        const auto window = detect_scam_window(a.timeline);
        const auto v = frauddetect::identify_victims(a.timeline, a.attribution.roles, window);
        for (const auto& e : a.timeline.events)
            if (const auto* s = e.as<Sell>(); s && e.position <= window.end) CHECK(v.victims.count(s->seller) == 0);
        for (const auto& x : v.victims) CHECK(a.timeline.holders_final.at(x) > 0);
    }
}

TEST_CASE("stable pool is not a rug pull") {
    const auto a = analyse("stable");
    const auto c = frauddetect::classify_rug_pull(a.timeline, a.attribution.roles);
    CHECK(c.verdict == frauddetect::Verdict::none);
    CHECK_FALSE(c.pump_and_dump);
    CHECK_FALSE(frauddetect::detect_advance_fee(a.timeline).has_value());
}

TEST_CASE("advance fee behaviour") {
    const auto fee = analyse("fee5");
    const auto f = frauddetect::detect_advance_fee(fee.timeline);
    REQUIRE(f.has_value());
    CHECK(f->transfer_fee);
    CHECK_FALSE(f->auto_liquidity);
    CHECK(f->sells_short == f->sells_examined);
    CHECK(f->median_fee_share == Rational(1, 20));

    for (const std::string name : {"token3", "token5"}) {
        CAPTURE(name);
        const auto a = analyse(name);
        const auto g = frauddetect::detect_advance_fee(a.timeline);
        REQUIRE(g.has_value());
        CHECK(g->transfer_fee);
        CHECK(g->auto_liquidity);
    }
    for (const std::string name : {"token1", "token2", "token4", "fig2"}) {
        CAPTURE(name);
        CHECK_FALSE(frauddetect::detect_advance_fee(analyse(name).timeline).has_value());
    }
}

TEST_CASE("funder chain and lucky peak seller") {
    const auto exp = testutil::expected("funders");
    const auto a = analyse("funders");
    std::vector<std::string> funders;
    for (const auto& [addr, r] : a.attribution.roles)
        if (r.has(Role::deployer_funder)) funders.push_back(addr.hex());
    CHECK(funders == exp["funders"].get<std::vector<std::string>>());
    const auto& lucky = a.attribution.roles.at(testutil::addr(exp["top_seller"]));
    CHECK(lucky.has(Role::top_seller));
    CHECK(lucky.certainty == Certainty::suspected);
    CHECK(a.attribution.certain().count(lucky.address) == 0);
    CHECK(a.attribution.suspected().count(lucky.address) == 1);
    for (const auto& [addr, r] : a.attribution.roles) {
        CHECK_FALSE(r.citations.empty());
        for (const auto& h : r.citations) CHECK(a.store.find_tx(h) != nullptr);
    }
}

TEST_CASE("single mint gives a degenerate window") {
    const auto exp = testutil::expected("mintonly");
    const auto a = analyse("mintonly");
    std::vector<std::string> kinds;
    for (const auto& e : a.timeline.events) kinds.emplace_back(event_name(e.kind));
    CHECK(kinds == exp["events"].get<std::vector<std::string>>());
    const auto w = detect_scam_window(a.timeline);
    CHECK(w.low_confidence);
    const auto c = frauddetect::classify_rug_pull(a.timeline, a.attribution.roles);
    CHECK(c.verdict == frauddetect::Verdict::none);
    CHECK(c.confidence == frauddetect::Confidence::low);
    const auto rsl = frauddetect::compute_rsl(a.timeline, a.attribution.roles, &w);
    CHECK(rsl.revenue == 0);
    CHECK(rsl.spend == 0);
    CHECK(rsl.delta_liquidity == 0);
}

TEST_CASE("profit bounds against the published figures") {
    for (const std::string name : {"token1", "token2", "token3", "token4", "token5"}) {
        CAPTURE(name);
        const auto t1 = testutil::expected(name)["table1"];
        const auto a = analyse(name);
        const auto w = detect_scam_window(a.timeline);
        const auto rsl = frauddetect::compute_rsl(a.timeline, a.attribution.roles, &w);
        const auto p = frauddetect::profit_bounds(rsl.revenue, rsl.spend, rsl.delta_liquidity, a.store.rates(),
                                                  utc_date(w.start_time));
        CHECK(format_eth(p.p_min) == t1["p_min_eth"].get<std::string>());
        CHECK(format_eth(p.p_max) == t1["p_max_eth"].get<std::string>());
        REQUIRE(p.usd_rate.has_value());
        CHECK(*p.usd_rate_literal == t1["usd_rate"].get<std::string>());
        const auto d = frauddetect::compare_with_published(
            p, {t1["printed_p_min_eth"].get<std::string>(), t1["printed_p_max_eth"].get<std::string>()});
        const bool flagged = name == "token4" || name == "token5";
        CHECK(d.empty() != flagged);
        for (const auto& x : d) CHECK(x.field == "p_min");
    }
}

TEST_CASE("profit formula on literal inputs") {
    const auto p = frauddetect::profit_bounds(wei("10.57"), wei("15.96"), wei("5.39"));
    CHECK(format_eth(p.p_max) == "15.96");
    CHECK(format_eth(p.p_min) == "0.00");
    const auto q = frauddetect::profit_bounds(wei("7.11"), wei("8.13"), wei("0.26"));
    CHECK(format_eth(q.p_min) == "-0.76");
    CHECK(format_eth(q.p_max) == "7.37");
    CHECK(frauddetect::compare_with_published(q, {std::string("1.28"), std::string("7.37")}).size() == 1);
    CHECK(frauddetect::compare_with_published(q, {std::string("-0.76"), std::nullopt}).empty());
}

TEST_CASE("pump and dump detection on synthetic series") {
    const char* a = "0x00000000000000000000000000000000000000a1";
    const char* b = "0x00000000000000000000000000000000000000b2";
    std::vector<PricePoint> s{point(0, true, a, 1), point(1, true, a, 3), point(2, true, b, 6),
                              point(3, false, a, 2), point(4, false, b, Rational(1, 2))};
    const auto f = frauddetect::detect_pump_and_dump(s, {});
    REQUIRE(f.has_value());
    CHECK(f->rise_factor == 6);
    CHECK(f->collapse_factor == Rational(11, 12));
    CHECK(f->peak.tx_hash == s[2].tx_hash);

    std::vector<PricePoint> mild{point(0, true, a, 1), point(1, true, a, 4), point(2, false, a, Rational(1, 5))};
    CHECK_FALSE(frauddetect::detect_pump_and_dump(mild, {}).has_value());
    std::vector<PricePoint> hold{point(0, true, a, 1), point(1, true, a, 8), point(2, false, a, 2)};
    CHECK_FALSE(frauddetect::detect_pump_and_dump(hold, {}).has_value());
    CHECK_FALSE(frauddetect::detect_pump_and_dump({}, {}).has_value());
}

TEST_CASE("top sellers") {
    const char* a = "0x00000000000000000000000000000000000000a1";
    const char* b = "0x00000000000000000000000000000000000000b2";
    const char* c = "0x00000000000000000000000000000000000000c3";
    std::vector<PricePoint> s{point(0, true, a, 1), point(1, false, b, 100), point(2, false, c, 94),
                              point(3, false, a, 96)};
    const auto top = heuristics::find_top_sellers(s, Rational(1, 20));
    CHECK(top == std::set<Address>{Address::parse(b), Address::parse(a)});
    std::vector<PricePoint> none{point(0, true, a, 100), point(1, false, b, 90)};
    CHECK(heuristics::find_top_sellers(none, Rational(1, 20)).empty());

    // Multi-peak series: only sellers at the global peak.
    const auto t4 = analyse("token4");
    const auto series = price_series(t4.timeline).points;
    Rational max = 0;
    for (const auto& p : series) max = std::max(max, p.price);
    std::set<Address> oracle;
    for (const auto& p : series)
        if (!p.is_buy && p.price * 20 >= max * 19) oracle.insert(p.trader);
    CHECK(heuristics::find_top_sellers(series, Rational(1, 20)) == oracle);
}

TEST_CASE("certain set ignores swap perturbations") {
    const auto a = analyse("token1");
    auto tl = a.timeline;
    // Drop every second swap; creation and liquidity events stay.
    std::vector<TokenEvent> kept;
    bool drop = false;
    for (const auto& e : tl.events) {
        if (e.as<Buy>() || e.as<Sell>()) {
            drop = !drop;
            if (drop) continue;
        }
        kept.push_back(e);
    }
    tl.events = kept;
    const auto b = heuristics::attribute_scammer_addresses(tl, a.store);
    CHECK(b.certain() == a.attribution.certain());
}
