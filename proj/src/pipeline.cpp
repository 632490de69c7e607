#include "rugtrace/pipeline.hpp"

#include "rugtrace/errors.hpp"

namespace rugtrace::pipeline {

SourceInfo describe_source(const chaindata::ChainStore& store, const std::string& kind) {
    return {kind, chaindata::bundle_digest(store.raw()).hex()};
}

Analysis analyze(const chaindata::ChainStore& store, const Address& token, const Config& config,
                 const std::optional<std::string>& contract_source) {
    Analysis a;
    a.timeline = lifecycle::build_timeline(token, store, config.lifecycle);
    a.prices = lifecycle::price_series(a.timeline);
    if (!a.timeline.empty()) a.window = lifecycle::detect_scam_window(a.timeline, config.lifecycle);
    a.attribution = heuristics::attribute_scammer_addresses(a.timeline, store, config.heuristics, config.fraud);
    a.classification = frauddetect::classify_rug_pull(a.timeline, a.attribution.roles, config.fraud);
    const auto* window = a.window ? &*a.window : nullptr;
    a.rsl = frauddetect::compute_rsl(a.timeline, a.attribution.roles, window, config.fraud);
    if (a.window && !store.rates().empty()) {
        a.profit = frauddetect::profit_bounds(a.rsl.revenue, a.rsl.spend, a.rsl.delta_liquidity, store.rates(),
                                              utc_date(a.window->start_time));
    } else {
        a.profit = frauddetect::profit_bounds(a.rsl.revenue, a.rsl.spend, a.rsl.delta_liquidity);
    }
    if (config.published) a.discrepancies = frauddetect::compare_with_published(a.profit, *config.published);
    if (a.window) a.victims = frauddetect::identify_victims(a.timeline, a.attribution.roles, *a.window);
    a.advance_fee = frauddetect::detect_advance_fee(a.timeline, config.fraud);
    if (contract_source) a.contract = contractcheck::scan_source(*contract_source, true);
    return a;
}

trace::TraceConfig trace_config_for(const Analysis& analysis, const Config& config) {
    auto cfg = config.trace;
    if (!cfg.anchor && analysis.window) cfg.anchor = analysis.window->start_time;
    return cfg;
}

trace::TraceGraph run_trace(const Analysis& analysis, const chaindata::ChainStore& store, const Config& config) {
    return trace::trace_funds(analysis.attribution.certain(), store, trace_config_for(analysis, config),
                              &analysis.attribution.roles);
}

trace::LaunderingSummary summarize(const Analysis& analysis, const trace::TraceGraph& graph,
                                   const chaindata::ChainStore& store, const Config& config) {
    return trace::summarize_laundering(graph, store, analysis.attribution.deployer, config.summary);
}

}  // namespace rugtrace::pipeline
