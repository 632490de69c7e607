#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rugtrace/export.hpp"

namespace rugtrace::report {

using exporting::Json;

/// One statement in the dossier. Quantitative claims always cite at least
/// one transaction; a claim without a value is a gap.
struct Claim {
    std::string id;
    std::string label;
    std::optional<std::string> value;
    std::string text;
    bool quantitative = false;
    std::vector<TxHash> citations;
};

struct Section {
    std::string id;
    std::string title;
    std::vector<Claim> claims;
};

struct Gap {
    std::string field;
    std::string reason;
};

struct Provenance {
    std::string tool = "rugtrace";
    std::string version;
    pipeline::SourceInfo source;
    Json thresholds;
};

struct PriceRow {
    std::int64_t timestamp = 0;
    std::uint64_t block = 0;
    std::string side;
    std::string price_eth;
};

struct EvidenceReport {
    std::string schema_version = exporting::kSchemaVersion;
    std::string token;
    std::optional<std::string> pair;
    Json window;
    Json classification;
    Json profit;
    std::vector<std::string> victims;
    Json attribution;
    Json laundering;
    std::vector<PriceRow> prices;
    std::vector<Section> sections;
    std::vector<Gap> gaps;
    Provenance provenance;

    /// Every transaction hash cited anywhere in the report, sorted.
    std::vector<TxHash> citations() const;
};

/// `graph` and `summary` may be null, in which case the laundering part is
/// reported as a gap.
EvidenceReport build_evidence_report(const pipeline::Analysis& analysis, const trace::TraceGraph* graph,
                                     const trace::LaunderingSummary* summary, const chaindata::ChainStore& store,
                                     const pipeline::SourceInfo& source, const pipeline::Config& config);

/// Replaces every address with a truncated hash of itself.
void anonymize(EvidenceReport& report);
std::string anonymized_address(const Address& a);

Json to_json(const EvidenceReport& report);
std::string render_markdown(const EvidenceReport& report);
/// `format` is "json" or "md". Throws ConfigError otherwise.
std::string render(const EvidenceReport& report, const std::string& format);

}  // namespace rugtrace::report
