#include "doctest.h"
#include "fixture_util.hpp"
#include "rugtrace/frauddetect.hpp"
#include "rugtrace/heuristics.hpp"

using namespace rugtrace;

TEST_CASE("token fixtures reproduce their holder and price statistics") {
    for (const std::string name : {"token1", "token2", "token3", "token4", "token5"}) {
        CAPTURE(name);
        const auto store = testutil::load(name);
        const auto exp = testutil::expected(name);
        const auto t1 = exp["table1"];
        const auto tl = lifecycle::build_timeline(testutil::addr(exp["token"]), store);
        CHECK(tl.transfer_count == t1["transfers"].get<std::size_t>());
        CHECK(tl.unique_addresses() == t1["unique_addresses"].get<std::size_t>());
        CHECK(tl.remaining_holders() == t1["remaining_holders"].get<std::size_t>());
        const auto series = lifecycle::price_series(tl);
        Rational max = 0;
        for (const auto& p : series.points) max = std::max(max, p.price);
        CHECK(format_scientific(max) == t1["max_price_eth"].get<std::string>());

        const auto window = lifecycle::detect_scam_window(tl);
        CHECK(format_utc(window.start_time) == t1["active_start"].get<std::string>());
        CHECK(format_utc(window.end_time) == t1["active_end"].get<std::string>());

        const auto attribution = heuristics::attribute_scammer_addresses(tl, store);
        const auto rsl = frauddetect::compute_rsl(tl, attribution.roles, &window);
        CHECK(format_eth(rsl.revenue) == t1["revenue_eth"].get<std::string>());
        CHECK(format_eth(rsl.spend) == t1["spend_eth"].get<std::string>());
        const unsigned dl_places = t1["delta_liquidity_eth"].get<std::string>().size() -
                                   t1["delta_liquidity_eth"].get<std::string>().find('.') - 1;
        CHECK(format_eth(rsl.delta_liquidity, dl_places) == t1["delta_liquidity_eth"].get<std::string>());
    }
}
