#include "rugtrace/app.hpp"

#include <fstream>
#include <sstream>

#include "rugtrace/errors.hpp"

namespace rugtrace::app {

namespace fs = std::filesystem;

Json source_json(const SourceSpec& spec) {
    if (spec.kind == "fixture") return Json{{"kind", "fixture"}, {"fixtures", spec.fixtures.string()}};
    Json j{{"kind", "live"},
           {"baseUrl", spec.live.base_url},
           {"apiKeyEnv", spec.live.api_key_env},
           {"requestsPerSecond", spec.live.requests_per_second},
           {"pageSize", spec.live.page_size},
           {"cacheDir", spec.live.cache_dir.string()}};
    j["registryDir"] = spec.live.registry_dir ? Json(spec.live.registry_dir->string()) : Json(nullptr);
    return j;
}

SourceSpec source_from_json(const Json& j) {
    SourceSpec s;
    try {
        s.kind = j.at("kind").get<std::string>();
        if (s.kind == "fixture") {
            s.fixtures = j.at("fixtures").get<std::string>();
        } else if (s.kind == "live") {
            s.live.base_url = j.at("baseUrl").get<std::string>();
            s.live.api_key_env = j.value("apiKeyEnv", s.live.api_key_env);
            s.live.requests_per_second = j.value("requestsPerSecond", s.live.requests_per_second);
            s.live.page_size = j.value("pageSize", s.live.page_size);
            s.live.cache_dir = j.at("cacheDir").get<std::string>();
            if (j.contains("registryDir") && !j["registryDir"].is_null())
                s.live.registry_dir = fs::path(j["registryDir"].get<std::string>());
        } else {
            throw ConfigError("unknown source kind '" + s.kind + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid source: ") + e.what());
    }
    return s;
}

std::unique_ptr<Session> Session::open(const SourceSpec& spec, const std::optional<Address>& token) {
    auto s = std::unique_ptr<Session>(new Session());
    s->spec_ = spec;
    if (spec.kind == "fixture") {
        s->store_ = chaindata::ChainStore::build(chaindata::read_bundle(spec.fixtures));
        return s;
    }
    if (spec.kind != "live") throw ConfigError("unknown source kind '" + spec.kind + "'");
    if (spec.live.cache_dir.empty()) throw ConfigError("live mode needs a cache directory");
    const std::string key = live::api_key_from_env(spec.live);
    s->live_ = std::make_unique<live::Source>(spec.live, key);
    s->live_->load_cache();
    if (token) s->live_->fetch_token(*token);
    s->rebuild();
    return s;
}

std::unique_ptr<Session> Session::resume(const SourceSpec& spec) { return open(spec, std::nullopt); }

void Session::rebuild() {
    store_ = chaindata::ChainStore::build(live_->bundle());
    store_.set_partial(true);
    for (const Address& a : live_->fetched()) store_.mark_history_fetched(a);
}

pipeline::SourceInfo Session::source_info() const { return pipeline::describe_source(store_, spec_.kind); }

std::optional<std::string> Session::contract_source(const Address& token) const {
    const fs::path dir = spec_.kind == "fixture" ? spec_.fixtures : spec_.live.cache_dir;
    const fs::path p = dir / "contracts" / (token.hex() + ".sol");
    if (!fs::exists(p)) return std::nullopt;
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool Session::ensure_history(const std::set<Address>& addresses) {
    if (!live_) return false;
    if (live_->fetch_history(addresses).empty()) return false;
    rebuild();
    return true;
}

namespace {

Rational rational_value(const Json& v, const std::string& name) {
    try {
        if (v.is_string()) return exporting::parse_rational(v.get<std::string>());
        if (v.is_number_integer()) return Rational(v.get<long long>());
        if (v.is_number()) return exporting::parse_rational(v.dump());
    } catch (const ParseError&) {
    }
    throw ConfigError(name + ": expected a decimal number, got " + v.dump());
}

Amount integer_value(const Json& v, const std::string& name) {
    try {
        if (v.is_string()) return parse_amount(v.get<std::string>());
        if (v.is_number_unsigned()) return Amount(v.get<unsigned long long>());
    } catch (const ParseError&) {
    }
    throw ConfigError(name + ": expected a non-negative integer, got " + v.dump());
}

std::string decimal_text(const Json& v, const std::string& name) {
    rational_value(v, name);
    return v.is_string() ? v.get<std::string>() : v.dump();
}

}  // namespace

void apply_overrides(pipeline::Config& c, const Json& overrides) {
    if (overrides.is_null()) return;
    if (!overrides.is_object()) throw ConfigError("overrides must be an object");
    for (const auto& [name, v] : overrides.items()) {
        if (name == "maxDepth") {
            const Amount d = integer_value(v, name);
            if (d > 64) throw ConfigError("maxDepth must be between 0 and 64");
            c.trace.max_depth = static_cast<unsigned>(d);
        } else if (name == "dustWei") {
            c.trace.dust_threshold = integer_value(v, name);
        } else if (name == "pumpRise") {
            const Rational r = rational_value(v, name);
            if (r <= 1) throw ConfigError("pumpRise must be greater than 1");
            c.fraud.pump.rise = r;
        } else if (name == "pumpCollapse") {
            const Rational r = rational_value(v, name);
            if (r <= 0 || r > 1) throw ConfigError("pumpCollapse must be in (0, 1]");
            c.fraud.pump.collapse = r;
        } else if (name == "kycEth") {
            const Rational r = rational_value(v, name);
            if (r < 0) throw ConfigError("kycEth must be non-negative");
            const Rational wei = r * Rational(wei_per_eth());
            if (boost::multiprecision::denominator(wei) != 1) throw ConfigError("kycEth has more than 18 decimals");
            c.summary.kyc_threshold = boost::multiprecision::numerator(wei);
        } else if (name == "anonymize") {
            if (!v.is_boolean()) throw ConfigError("anonymize must be a boolean");
            c.anonymize = v.get<bool>();
        } else if (name == "publishedPMin" || name == "publishedPMax") {
            if (!c.published) c.published = frauddetect::PublishedFigures{};
            (name == "publishedPMin" ? c.published->p_min : c.published->p_max) = decimal_text(v, name);
        } else {
            throw ConfigError("unknown setting '" + name + "'");
        }
    }
}

pipeline::Analysis analyze(Session& session, const Address& token, const pipeline::Config& config) {
    for (;;) {
        auto a = pipeline::analyze(session.store(), token, config, session.contract_source(token));
        if (!session.is_live()) return a;
        std::set<Address> missing;
        for (const Address& x : a.attribution.certain())
            if (!session.store().has_history(x)) missing.insert(x);
        if (missing.empty() || !session.ensure_history(missing)) return a;
    }
}

trace::TraceGraph trace(Session& session, const pipeline::Analysis& analysis, const pipeline::Config& config) {
    for (;;) {
        auto graph = pipeline::run_trace(analysis, session.store(), config);
        std::set<Address> missing;
        for (const auto& [a, n] : graph.nodes)
            if (n.history_missing) missing.insert(a);
        if (missing.empty() || !session.ensure_history(missing)) return graph;
    }
}

trace::LaunderingSummary summarize(Session& session, const pipeline::Analysis& analysis,
                                   const trace::TraceGraph& graph, const pipeline::Config& config) {
    for (;;) {
        auto summary = pipeline::summarize(analysis, graph, session.store(), config);
        if (!session.is_live() || summary.funding.source || summary.funding.via.empty()) return summary;
        if (!session.ensure_history({summary.funding.via.back().address})) return summary;
    }
}

std::string timeline_document(const pipeline::Analysis& a) { return exporting::dump(exporting::timeline_json(a)); }
std::string verdict_document(const pipeline::Analysis& a) { return exporting::dump(exporting::verdict_json(a)); }
std::string attribution_document(const pipeline::Analysis& a) {
    return exporting::dump(exporting::attribution_json(a));
}

std::string trace_document(const trace::TraceGraph& graph, const trace::LaunderingSummary& summary) {
    return exporting::dump(exporting::trace_json(graph, &summary));
}

std::string report_document(const Session& session, const pipeline::Analysis& analysis,
                            const trace::TraceGraph& graph, const trace::LaunderingSummary& summary,
                            const pipeline::Config& config, const std::string& format) {
    const auto r = report::build_evidence_report(analysis, &graph, &summary, session.store(), session.source_info(),
                                                 config);
    return report::render(r, format);
}

}  // namespace rugtrace::app
