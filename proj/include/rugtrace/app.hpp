#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "rugtrace/export.hpp"
#include "rugtrace/live.hpp"
#include "rugtrace/report.hpp"

namespace rugtrace::app {

using exporting::Json;

/// Where chain data comes from: a fixture bundle or a live explorer API.
struct SourceSpec {
    std::string kind = "fixture";  // fixture | live
    std::filesystem::path fixtures;
    live::LiveConfig live;
};

Json source_json(const SourceSpec& spec);
SourceSpec source_from_json(const Json& j);

/// An opened data source. Live sessions fetch missing history on demand and
/// write everything through to the cache directory.
class Session {
public:
    /// Loads the bundle; for live sources fetches the token first.
    static std::unique_ptr<Session> open(const SourceSpec& spec, const std::optional<Address>& token);
    /// Reopens without fetching: fixtures as usual, live sources from cache.
    static std::unique_ptr<Session> resume(const SourceSpec& spec);

    const chaindata::ChainStore& store() const { return store_; }
    const SourceSpec& spec() const { return spec_; }
    bool is_live() const { return live_ != nullptr; }
    pipeline::SourceInfo source_info() const;
    /// Contract source stored next to the bundle as contracts/<address>.sol.
    std::optional<std::string> contract_source(const Address& token) const;
    /// Fetches history for addresses that lack it (live only). Returns true
    /// when the store changed.
    bool ensure_history(const std::set<Address>& addresses);

private:
    void rebuild();

    SourceSpec spec_;
    chaindata::ChainStore store_;
    std::unique_ptr<live::Source> live_;
};

/// Threshold overrides by name: maxDepth, dustWei, pumpRise, pumpCollapse,
/// kycEth, anonymize, publishedPMin, publishedPMax. Throws ConfigError for
/// unknown names or values outside their documented ranges.
void apply_overrides(pipeline::Config& config, const Json& overrides);

/// In live mode, fetches histories of attributed addresses until the
/// attribution stops growing.
pipeline::Analysis analyze(Session& session, const Address& token, const pipeline::Config& config);

/// Full trace to the configured depth, fetching histories in live mode.
trace::TraceGraph trace(Session& session, const pipeline::Analysis& analysis, const pipeline::Config& config);

trace::LaunderingSummary summarize(Session& session, const pipeline::Analysis& analysis,
                                   const trace::TraceGraph& graph, const pipeline::Config& config);

/// Canonical documents, byte-identical wherever they are produced.
std::string timeline_document(const pipeline::Analysis& analysis);
std::string verdict_document(const pipeline::Analysis& analysis);
std::string attribution_document(const pipeline::Analysis& analysis);
std::string trace_document(const trace::TraceGraph& graph, const trace::LaunderingSummary& summary);
std::string report_document(const Session& session, const pipeline::Analysis& analysis,
                            const trace::TraceGraph& graph, const trace::LaunderingSummary& summary,
                            const pipeline::Config& config, const std::string& format);

}  // namespace rugtrace::app
