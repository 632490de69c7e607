#pragma once

#include <string>

#include "json.hpp"
#include "rugtrace/pipeline.hpp"

namespace rugtrace::exporting {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSchemaVersion = "1.0.0";

/// Exact decimal rendering of a rational, rounded half away from zero.
std::string format_rational(const Rational& value, unsigned places);
/// Accepts "a/b", integers and decimals such as "0.9" or "-1.5".
/// Throws ParseError.
Rational parse_rational(const std::string& s);
/// "a/b", or "a" for integers.
std::string rational_str(const Rational& r);
/// Shortest exact decimal for wei, e.g. "10.57" or "-0.76".
std::string eth_exact(const Amount& wei);

Json position_json(const Position& p);
Json timeline_json(const pipeline::Analysis& analysis);
Json verdict_json(const pipeline::Analysis& analysis);
Json attribution_json(const pipeline::Analysis& analysis);
Json contract_json(const std::optional<contractcheck::ScanResult>& scan);

Json config_json(const pipeline::Config& config);
pipeline::Config config_from_json(const Json& j);

Json finding_json(const trace::LaunderingFinding& finding);
/// Graph with optional findings. Node and edge order follows address order.
Json trace_json(const trace::TraceGraph& graph, const trace::LaunderingSummary* summary = nullptr);
/// Reads a graph in the `trace_json` schema; findings are ignored.
/// Throws ParseError on malformed input.
trace::TraceGraph trace_from_json(const Json& j);

/// Two-space indented dump with a trailing newline.
std::string dump(const Json& j);

}  // namespace rugtrace::exporting
