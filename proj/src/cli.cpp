#include "rugtrace/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "rugtrace/app.hpp"
#include "rugtrace/errors.hpp"
#include "rugtrace/service.hpp"

namespace rugtrace::cli {

namespace fs = std::filesystem;
using exporting::Json;

namespace {

struct Options {
    std::string fixtures;
    std::string live;
    std::string cache;
    std::string registry;
    std::string api_key_env;
    std::vector<std::string> tokens;
    std::string out = "rugtrace-out";
    std::string format = "json";
    std::optional<std::string> max_depth, dust_wei, pump_rise, pump_collapse, kyc_eth;
    std::optional<std::string> published_p_min, published_p_max;
    bool anonymize = false;
    std::string data_dir;
    std::string bind;
    std::string static_dir;
};

void add_source_flags(CLI::App& cmd, Options& o) {
    auto* fx = cmd.add_option("--fixtures", o.fixtures, "Fixture bundle directory");
    auto* lv = cmd.add_option("--live", o.live, "Explorer API base URL (key read from --api-key-env)");
    fx->excludes(lv);
    cmd.add_option("--cache", o.cache, "Live mode cache directory (default: <out>/cache)");
    cmd.add_option("--registry", o.registry, "Live mode address-tag registry directory (default: none)");
    o.api_key_env = live::LiveConfig{}.api_key_env;
    cmd.add_option("--api-key-env", o.api_key_env, "Environment variable holding the API key")->capture_default_str();
}

void add_token_flags(CLI::App& cmd, Options& o) {
    cmd.add_option("tokens,--token", o.tokens, "Token address; repeat for several tokens")->required();
    cmd.add_option("--out", o.out, "Output directory")->capture_default_str();
}

void add_threshold_flags(CLI::App& cmd, Options& o) {
    const pipeline::Config d;
    cmd.add_option("--max-depth", o.max_depth,
                   "Trace depth limit, 0 to 64 (default: " + std::to_string(d.trace.max_depth) + ")");
    cmd.add_option("--dust-wei", o.dust_wei,
                   "Ignore transfers below this many wei when tracing (default: " + d.trace.dust_threshold.str() + ")");
    cmd.add_option("--pump-rise", o.pump_rise,
                   "Price rise factor marking a pump, > 1 (default: " + exporting::rational_str(d.fraud.pump.rise) + ")");
    cmd.add_option("--pump-collapse", o.pump_collapse,
                   "Price drop from the peak, as a share of the peak, marking a dump, in (0, 1] (default: " +
                       exporting::rational_str(d.fraud.pump.collapse) + ")");
    cmd.add_option("--kyc-eth", o.kyc_eth,
                   "Exchange deposits at or above this many ETH count as KYC cash-out (default: " +
                       exporting::eth_exact(d.summary.kyc_threshold) + ")");
    cmd.add_option("--published-p-min", o.published_p_min,
                   "Published lower profit bound in ETH to compare against (default: none)");
    cmd.add_option("--published-p-max", o.published_p_max,
                   "Published upper profit bound in ETH to compare against (default: none)");
    cmd.add_flag("--anonymize", o.anonymize, "Replace addresses in the report with stable pseudonyms (default: off)");
}

Json overrides_of(const Options& o) {
    Json j = Json::object();
    if (o.max_depth) j["maxDepth"] = *o.max_depth;
    if (o.dust_wei) j["dustWei"] = *o.dust_wei;
    if (o.pump_rise) j["pumpRise"] = *o.pump_rise;
    if (o.pump_collapse) j["pumpCollapse"] = *o.pump_collapse;
    if (o.kyc_eth) j["kycEth"] = *o.kyc_eth;
    if (o.published_p_min) j["publishedPMin"] = *o.published_p_min;
    if (o.published_p_max) j["publishedPMax"] = *o.published_p_max;
    if (o.anonymize) j["anonymize"] = true;
    return j;
}

app::SourceSpec source_of(const Options& o) {
    app::SourceSpec s;
    if (!o.live.empty()) {
        s.kind = "live";
        s.live.base_url = o.live;
        s.live.api_key_env = o.api_key_env;
        s.live.cache_dir = o.cache.empty() ? fs::path(o.out) / "cache" : fs::path(o.cache);
        if (!o.registry.empty()) s.live.registry_dir = fs::path(o.registry);
    } else if (!o.fixtures.empty()) {
        s.kind = "fixture";
        s.fixtures = o.fixtures;
    } else {
        throw CLI::ValidationError("exactly one of --fixtures or --live is required");
    }
    return s;
}

void write_file(const fs::path& p, const std::string& content) {
    fs::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    f << content;
    if (!f) throw Error("io_error", "cannot write " + p.string());
}

enum class Stage { detect, attribute, trace, report };

void run_stage(Stage stage, const Options& o, std::ostream& out) {
    pipeline::Config config;
    app::apply_overrides(config, overrides_of(o));
    const auto spec = source_of(o);
    std::vector<Address> tokens;
    for (const auto& t : o.tokens) {
        const auto a = Address::try_parse(t);
        if (!a) throw ConfigError("not a token address: '" + t + "'");
        tokens.push_back(*a);
    }
    std::unique_ptr<app::Session> session;
    for (const Address& token : tokens) {
        if (!session || session->is_live()) session = app::Session::open(spec, token);
        const fs::path dir = tokens.size() > 1 ? fs::path(o.out) / token.hex() : fs::path(o.out);
        const auto analysis = app::analyze(*session, token, config);
        write_file(dir / "timeline.json", app::timeline_document(analysis));
        write_file(dir / "verdict.json", app::verdict_document(analysis));
        out << token.hex() << ": " << to_string(analysis.classification.verdict)
            << (analysis.classification.pump_and_dump ? " (pump and dump)" : "") << "\n";
        if (stage == Stage::detect) continue;
        write_file(dir / "attribution.json", app::attribution_document(analysis));
        if (stage == Stage::attribute) continue;
        const auto graph = app::trace(*session, analysis, config);
        const auto summary = app::summarize(*session, analysis, graph, config);
        write_file(dir / "trace.json", app::trace_document(graph, summary));
        if (stage == Stage::trace) continue;
        write_file(dir / ("report." + o.format),
                   app::report_document(*session, analysis, graph, summary, config, o.format));
    }
    out << "wrote " << o.out << "\n";
}

void run_ingest(const Options& o, std::ostream& out) {
    const auto spec = source_of(o);
    std::optional<Address> token;
    if (!o.tokens.empty()) {
        token = Address::try_parse(o.tokens.front());
        if (!token) throw ConfigError("not a token address: '" + o.tokens.front() + "'");
    }
    const auto session = app::Session::open(spec, token);
    const auto& store = session->store();
    Json tokens = Json::array();
    for (const Address& a : store.declared_tokens()) tokens.push_back(a.hex());
    const auto info = session->source_info();
    const Json j{{"source", info.kind},
                 {"digest", info.digest},
                 {"transactions", store.transactions().size()},
                 {"logs", store.logs().size()},
                 {"tags", store.raw().tags.size()},
                 {"rates", store.rates().entries().size()},
                 {"tokens", tokens},
                 {"decodeIssues", store.decode_issues().size()},
                 {"unknownLogs", store.unknown_log_count()}};
    write_file(fs::path(o.out) / "ingest.json", exporting::dump(j));
    out << exporting::dump(j);
}

void run_serve(const Options& o) {
    service::Options so = service::options_from_env();
    if (!o.data_dir.empty()) so.data_dir = o.data_dir;
    if (!o.static_dir.empty()) so.static_dir = fs::path(o.static_dir);
    std::string bind = o.bind;
    if (bind.empty()) {
        const char* env = std::getenv(service::kBindEnv);
        bind = env && *env ? env : service::kDefaultBind;
    }
    service::Service svc(so);
    service::serve(svc, bind);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Rug-pull forensics: detection, attribution, fund tracing and evidence reports", "rugtrace"};
    app.set_version_flag("--version", RUGTRACE_VERSION);
    app.require_subcommand(1);
    Options o;

    auto* ingest = app.add_subcommand("ingest", "Validate and load a chain-data bundle");
    add_source_flags(*ingest, o);
    ingest->add_option("tokens,--token", o.tokens, "Token to fetch first in live mode");
    ingest->add_option("--out", o.out, "Output directory")->capture_default_str();

    struct StageCmd {
        const char* name;
        const char* help;
        Stage stage;
    };
    const StageCmd stages[] = {
        {"detect", "Build the token timeline and classify it (timeline.json, verdict.json)", Stage::detect},
        {"attribute", "Detect, then attribute scammer addresses (adds attribution.json)", Stage::attribute},
        {"trace", "Attribute, then trace funds to the configured depth (adds trace.json)", Stage::trace},
        {"report", "Run every stage and write the evidence report (adds report.json or report.md)", Stage::report},
    };
    std::map<CLI::App*, Stage> stage_of;
    for (const auto& s : stages) {
        auto* cmd = app.add_subcommand(s.name, s.help);
        add_source_flags(*cmd, o);
        add_token_flags(*cmd, o);
        add_threshold_flags(*cmd, o);
        if (s.stage == Stage::report)
            cmd->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"json", "md"}))->capture_default_str();
        stage_of[cmd] = s.stage;
    }

    auto* serve = app.add_subcommand("serve", "Start the investigation service (local use, no authentication)");
    serve->add_option("--data-dir", o.data_dir,
                      std::string("Investigation storage (default: $") + service::kDataDirEnv + " or ./rugtrace-data)");
    serve->add_option("--bind", o.bind,
                      std::string("host:port (default: $") + service::kBindEnv + " or " + service::kDefaultBind + ")");
    serve->add_option("--static", o.static_dir, "Directory served under /ui (default: none)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << RUGTRACE_VERSION << "\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\nrun 'rugtrace --help' for usage\n";
        return kExitUsage;
    }

    try {
        if (ingest->parsed()) run_ingest(o, out);
        else if (serve->parsed()) run_serve(o);
        else
            for (const auto& [cmd, stage] : stage_of)
                if (cmd->parsed()) run_stage(stage, o, out);
        return kExitOk;
    } catch (const CLI::ValidationError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        err << Json{{"error", e.code()}, {"message", e.what()}}.dump() << "\n";
        return kExitPipeline;
    } catch (const std::exception& e) {
        err << Json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
        return kExitPipeline;
    }
}

}  // namespace rugtrace::cli
