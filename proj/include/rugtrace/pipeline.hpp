#pragma once

#include <optional>
#include <string>

#include "rugtrace/contractcheck.hpp"
#include "rugtrace/frauddetect.hpp"
#include "rugtrace/heuristics.hpp"
#include "rugtrace/trace.hpp"

namespace rugtrace::pipeline {

/// Every tunable threshold, so a report can state exactly what it used.
struct Config {
    lifecycle::LifecycleConfig lifecycle;
    frauddetect::FraudConfig fraud;
    heuristics::HeuristicsConfig heuristics;
    trace::TraceConfig trace;
    trace::SummaryConfig summary;
    std::optional<frauddetect::PublishedFigures> published;
    bool anonymize = false;
};

/// Where the chain data came from, recorded in report provenance.
struct SourceInfo {
    std::string kind = "fixture";  // fixture | live
    std::string digest;            // keccak of the canonical bundle
};

SourceInfo describe_source(const chaindata::ChainStore& store, const std::string& kind);

struct Analysis {
    lifecycle::TokenTimeline timeline;
    lifecycle::PriceSeries prices;
    std::optional<lifecycle::ScamWindow> window;
    frauddetect::ScamClassification classification;
    frauddetect::RslResult rsl;
    frauddetect::ProfitEstimate profit;
    std::vector<frauddetect::Discrepancy> discrepancies;
    frauddetect::VictimSet victims;
    heuristics::Attribution attribution;
    std::optional<frauddetect::AdvanceFeeFinding> advance_fee;
    std::optional<contractcheck::ScanResult> contract;
};

/// Timeline, verdict, economics, victims and attribution for one token.
/// Throws NotFoundError for tokens the store has never seen.
Analysis analyze(const chaindata::ChainStore& store, const Address& token, const Config& config,
                 const std::optional<std::string>& contract_source = std::nullopt);

/// Trace configuration anchored at the analysis' scam window.
trace::TraceConfig trace_config_for(const Analysis& analysis, const Config& config);

trace::TraceGraph run_trace(const Analysis& analysis, const chaindata::ChainStore& store, const Config& config);

trace::LaunderingSummary summarize(const Analysis& analysis, const trace::TraceGraph& graph,
                                   const chaindata::ChainStore& store, const Config& config);

}  // namespace rugtrace::pipeline
