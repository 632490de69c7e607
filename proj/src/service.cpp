#include "rugtrace/service.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <regex>
#include <sstream>

#include "httplib.h"
#include "rugtrace/errors.hpp"
#include "rugtrace/keccak.hpp"

namespace rugtrace::service {

namespace fs = std::filesystem;

struct Service::Entry {
    std::shared_mutex lock;
    std::string id;
    bool loaded = false;
    std::unique_ptr<app::Session> session;
    pipeline::Config config;
    Address token;
    std::optional<pipeline::Analysis> analysis;
};

namespace {

struct HttpError : Error {
    HttpError(int status, std::string code, const std::string& message, Json detail = nullptr)
        : Error(std::move(code), message), status(status), detail(std::move(detail)) {}
    int status;
    Json detail;
};

Response json_response(int status, const Json& j) { return {status, "application/json", exporting::dump(j)}; }

Response error_response(int status, const std::string& code, const std::string& message, const Json& detail) {
    return json_response(status, Json{{"code", code}, {"message", message}, {"detail", detail}});
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw NotFoundError(p.filename().string() + " not found");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Json read_json(const fs::path& p) {
    try {
        return Json::parse(read_file(p));
    } catch (const Json::exception& e) {
        throw IntegrityError(p.string() + ": " + e.what());
    }
}

/// Write to a temporary file and rename, so readers never see partial files.
void write_atomic(const fs::path& p, const std::string& content) {
    fs::create_directories(p.parent_path());
    const fs::path tmp = p.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << content;
        if (!out) throw Error("io_error", "cannot write " + p.string());
    }
    fs::rename(tmp, p);
}

Json parse_body(const std::string& body) {
    if (body.empty()) return Json::object();
    try {
        Json j = Json::parse(body);
        if (!j.is_object()) throw HttpError(400, "invalid_body", "request body must be a JSON object");
        return j;
    } catch (const Json::exception& e) {
        throw HttpError(400, "invalid_body", "request body is not valid JSON", e.what());
    }
}

Address address_field(const Json& body, const char* key) {
    if (!body.contains(key) || !body[key].is_string())
        throw HttpError(400, "invalid_address", std::string("missing '") + key + "'", Json{{"field", key}});
    const auto a = Address::try_parse(body[key].get<std::string>());
    if (!a) throw HttpError(400, "invalid_address", "not an address: " + body[key].get<std::string>(), Json{{"field", key}});
    return *a;
}

app::SourceSpec source_from_body(const Json& body, const fs::path& default_cache) {
    app::SourceSpec spec;
    if (body.contains("source")) {
        spec = app::source_from_json(body["source"]);
    } else if (body.contains("fixtures") && body["fixtures"].is_string()) {
        spec.kind = "fixture";
        spec.fixtures = body["fixtures"].get<std::string>();
    } else if (body.contains("live") && body["live"].is_string()) {
        spec.kind = "live";
        spec.live.base_url = body["live"].get<std::string>();
        if (body.contains("registryDir") && body["registryDir"].is_string())
            spec.live.registry_dir = fs::path(body["registryDir"].get<std::string>());
    } else {
        throw HttpError(400, "invalid_source", "request needs 'fixtures' or 'live'");
    }
    if (spec.kind == "fixture") spec.fixtures = fs::absolute(spec.fixtures).lexically_normal();
    if (spec.kind == "live" && spec.live.cache_dir.empty()) spec.live.cache_dir = default_cache;
    return spec;
}

Json delta_json(const trace::TraceGraph& before, const trace::TraceGraph& after) {
    trace::TraceGraph delta;
    delta.config = after.config;
    for (const auto& [a, n] : after.nodes)
        if (!before.nodes.count(a)) delta.nodes.emplace(a, n);
    for (const auto& [k, e] : after.edges)
        if (!before.edges.count(k)) delta.edges.emplace(k, e);
    const Json j = exporting::trace_json(delta);
    return Json{{"nodes", j["nodes"]}, {"edges", j["edges"]}};
}

void apply_annotations(trace::TraceGraph& g, const Json& annotations) {
    for (const auto& a : annotations) {
        chaindata::AddressTag tag;
        tag.address = Address::parse(a.at("address").get<std::string>());
        tag.category = *chaindata::parse_tag_category(a.at("category").get<std::string>());
        tag.label = a.at("label").get<std::string>();
        trace::apply_tag(g, tag);
    }
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

}  // namespace

Service::Service(Options options) : options_(std::move(options)) {
    if (options_.data_dir.empty()) throw ConfigError("the service needs a data directory (" + std::string(kDataDirEnv) + ")");
    fs::create_directories(options_.data_dir / "investigations");
}

Service::~Service() = default;

fs::path Service::dir_of(const std::string& id) const { return options_.data_dir / "investigations" / id; }

std::shared_ptr<Service::Entry> Service::entry(const std::string& id) {
    static const std::regex valid("inv-[0-9a-f]{12}");
    if (!std::regex_match(id, valid) || !fs::exists(dir_of(id) / "investigation.json"))
        throw HttpError(404, "not_found", "no investigation " + id, Json{{"id", id}});
    std::shared_ptr<Entry> e;
    {
        std::lock_guard g(entries_mutex_);
        auto& slot = entries_[id];
        if (!slot) {
            slot = std::make_shared<Entry>();
            slot->id = id;
        }
        e = slot;
    }
    {
        std::unique_lock lock(e->lock);
        if (!e->loaded) {
            const Json meta = read_json(dir_of(id) / "investigation.json");
            e->token = Address::parse(meta.at("token").get<std::string>());
            e->config = exporting::config_from_json(meta.at("config"));
            e->session = app::Session::resume(app::source_from_json(meta.at("source")));
            e->analysis = app::analyze(*e->session, e->token, e->config);
            e->loaded = true;
        }
    }
    return e;
}

Response Service::handle(const Request& req) {
    try {
        if (req.method != "POST" || !req.idempotency_key) return dispatch(req);
        std::lock_guard g(idempotency_mutex_);
        const std::string key = keccak256(std::string_view(req.method + " " + req.path + " " + *req.idempotency_key)).hex();
        const fs::path stored = options_.data_dir / "idempotency" / (key.substr(2) + ".json");
        if (fs::exists(stored)) {
            const Json j = read_json(stored);
            return {j.at("status").get<int>(), j.at("contentType").get<std::string>(), j.at("body").get<std::string>()};
        }
        Response r = dispatch(req);
        if (r.status < 500)
            write_atomic(stored, Json{{"status", r.status}, {"contentType", r.content_type}, {"body", r.body}}.dump());
        return r;
    } catch (const HttpError& e) {
        return error_response(e.status, e.code(), e.what(), e.detail);
    } catch (const NotFoundError& e) {
        return error_response(404, e.code(), e.what(), nullptr);
    } catch (const TransportError& e) {
        return error_response(502, e.code(), e.what(), nullptr);
    } catch (const IntegrityError& e) {
        return error_response(422, e.code(), e.what(), nullptr);
    } catch (const Error& e) {
        return error_response(400, e.code(), e.what(), nullptr);
    } catch (const std::exception& e) {
        return error_response(500, "internal", e.what(), nullptr);
    }
}

Response Service::dispatch(const Request& req) {
    static const std::regex item(R"(^/investigations/([^/]+)(?:/([a-z]+))?/?$)");
    if (req.path == "/" && req.method == "GET")
        return json_response(200, Json{{"service", "rugtrace"}, {"version", RUGTRACE_VERSION}});
    if (req.path == "/investigations" || req.path == "/investigations/") {
        if (req.method == "POST") return create(req);
        if (req.method == "GET") {
            Json ids = Json::array();
            std::vector<std::string> names;
            for (const auto& d : fs::directory_iterator(options_.data_dir / "investigations"))
                if (fs::exists(d.path() / "investigation.json")) names.push_back(d.path().filename().string());
            std::sort(names.begin(), names.end());
            for (const auto& n : names) ids.push_back(n);
            return json_response(200, Json{{"investigations", ids}});
        }
        throw HttpError(405, "method_not_allowed", req.method + " not allowed on " + req.path);
    }
    std::smatch m;
    if (!std::regex_match(req.path, m, item))
        throw HttpError(404, "not_found", "no route for " + req.path, Json{{"path", req.path}});
    const std::string id = m[1];
    const std::string sub = m[2];
    if (req.method == "GET") {
        if (sub.empty()) return get_summary(id);
        if (sub == "timeline" || sub == "verdict" || sub == "attribution") return get_document(id, sub);
        if (sub == "graph") return get_graph(id, req.query);
        if (sub == "report") return get_report(id, req.query);
        if (sub == "audit") return get_audit(id);
    } else if (req.method == "POST") {
        if (sub == "expand") return expand(id, req);
        if (sub == "tag") return tag(id, req);
    }
    throw HttpError(404, "not_found", "no route for " + req.method + " " + req.path, Json{{"path", req.path}});
}

Response Service::create(const Request& req) {
    const Json body = parse_body(req.body);
    const Address token = address_field(body, "token");
    pipeline::Config config;
    app::apply_overrides(config, body.value("overrides", Json()));

    std::lock_guard g(create_mutex_);
    std::size_t n = 0;
    for ([[maybe_unused]] const auto& d : fs::directory_iterator(options_.data_dir / "investigations")) ++n;
    std::string id;
    for (;; ++n) {
        id = "inv-" + keccak256(std::string_view(token.hex() + body.dump() + std::to_string(n))).hex().substr(2, 12);
        if (!fs::exists(dir_of(id))) break;
    }
    const fs::path dir = dir_of(id);
    const app::SourceSpec spec = source_from_body(body, dir / "cache");
    try {
        auto session = app::Session::open(spec, token);
        auto analysis = app::analyze(*session, token, config);
        pipeline::Config shallow = config;
        shallow.trace.max_depth = std::min(1u, config.trace.max_depth);
        auto graph = app::trace(*session, analysis, shallow);
        graph.config.max_depth = config.trace.max_depth;
        const auto summary = app::summarize(*session, analysis, graph, config);

        write_atomic(dir / "graphs" / "1.json", app::trace_document(graph, summary));
        const Json meta{{"id", id},
                        {"token", token.hex()},
                        {"source", app::source_json(spec)},
                        {"config", exporting::config_json(config)},
                        {"revision", 1},
                        {"annotations", Json::array()},
                        {"audit", Json::array({Json{{"revision", 1}, {"action", "create"}}})}};
        write_atomic(dir / "investigation.json", exporting::dump(meta));

        auto e = std::make_shared<Entry>();
        e->id = id;
        e->token = token;
        e->config = config;
        e->analysis = std::move(analysis);
        e->session = std::move(session);
        e->loaded = true;
        {
            std::lock_guard lg(entries_mutex_);
            entries_[id] = e;
        }
        return json_response(201, Json{{"id", id},
                                       {"token", token.hex()},
                                       {"revision", 1},
                                       {"verdict", std::string(to_string(e->analysis->classification.verdict))}});
    } catch (...) {
        std::error_code ec;
        fs::remove_all(dir, ec);
        throw;
    }
}

Response Service::get_summary(const std::string& id) {
    auto e = entry(id);
    std::shared_lock lock(e->lock);
    const Json meta = read_json(dir_of(id) / "investigation.json");
    const int rev = meta.at("revision").get<int>();
    const auto graph = exporting::trace_from_json(read_json(dir_of(id) / "graphs" / (std::to_string(rev) + ".json")));
    Json frontier = Json::array();
    for (const auto& f : graph.frontier) frontier.push_back(f.hex());
    const auto& c = e->analysis->classification;
    return json_response(200, Json{{"id", id},
                                   {"token", meta.at("token")},
                                   {"revision", rev},
                                   {"source", meta.at("source")},
                                   {"config", meta.at("config")},
                                   {"verdict", to_string(c.verdict)},
                                   {"pumpAndDump", c.pump_and_dump},
                                   {"nodes", graph.nodes.size()},
                                   {"edges", graph.edges.size()},
                                   {"frontier", frontier},
                                   {"annotations", meta.at("annotations")}});
}

Response Service::get_document(const std::string& id, const std::string& which) {
    auto e = entry(id);
    std::shared_lock lock(e->lock);
    const auto& a = *e->analysis;
    std::string body = which == "timeline" ? app::timeline_document(a)
                       : which == "verdict" ? app::verdict_document(a)
                                            : app::attribution_document(a);
    return {200, "application/json", std::move(body)};
}

Response Service::get_graph(const std::string& id, const std::map<std::string, std::string>& query) {
    auto e = entry(id);
    std::shared_lock lock(e->lock);
    const Json meta = read_json(dir_of(id) / "investigation.json");
    int rev = meta.at("revision").get<int>();
    if (auto it = query.find("rev"); it != query.end()) {
        try {
            rev = std::stoi(it->second);
        } catch (const std::exception&) {
            throw HttpError(400, "invalid_revision", "rev must be an integer", Json{{"rev", it->second}});
        }
    }
    const fs::path p = dir_of(id) / "graphs" / (std::to_string(rev) + ".json");
    if (rev < 1 || !fs::exists(p))
        throw HttpError(404, "not_found", "no graph revision " + std::to_string(rev), Json{{"rev", rev}});
    return {200, "application/json", read_file(p)};
}

Response Service::get_report(const std::string& id, const std::map<std::string, std::string>& query) {
    auto e = entry(id);
    std::shared_lock lock(e->lock);
    const std::string format = query.count("format") ? query.at("format") : "json";
    if (format != "json" && format != "md")
        throw HttpError(400, "invalid_format", "format must be json or md", Json{{"format", format}});
    const Json meta = read_json(dir_of(id) / "investigation.json");
    const int rev = meta.at("revision").get<int>();
    const auto graph = exporting::trace_from_json(read_json(dir_of(id) / "graphs" / (std::to_string(rev) + ".json")));
    const auto summary = pipeline::summarize(*e->analysis, graph, e->session->store(), e->config);
    return {200, format == "md" ? "text/markdown; charset=utf-8" : "application/json",
            app::report_document(*e->session, *e->analysis, graph, summary, e->config, format)};
}

Response Service::get_audit(const std::string& id) {
    auto e = entry(id);
    std::shared_lock lock(e->lock);
    const Json meta = read_json(dir_of(id) / "investigation.json");
    return json_response(200, Json{{"id", id}, {"audit", meta.at("audit")}});
}

Response Service::expand(const std::string& id, const Request& req) {
    const Json body = parse_body(req.body);
    const Address address = address_field(body, "address");
    auto e = entry(id);
    std::unique_lock lock(e->lock);
    Json meta = read_json(dir_of(id) / "investigation.json");
    const int rev = meta.at("revision").get<int>();
    auto graph = exporting::trace_from_json(read_json(dir_of(id) / "graphs" / (std::to_string(rev) + ".json")));
    const auto noop = [&](const std::string& reason) {
        return json_response(200, Json{{"status", "noop"},
                                       {"reason", reason},
                                       {"revision", rev},
                                       {"delta", Json{{"nodes", Json::array()}, {"edges", Json::array()}}}});
    };
    const auto* node = graph.node(address);
    if (!node) return noop("unknown_address");
    if (node->terminal) return noop("terminal");
    if (node->expanded) return noop("already_expanded");
    if (!e->session->store().has_history(address)) e->session->ensure_history({address});
    if (node->history_missing && !e->session->is_live()) return noop("history_missing");
    const auto before = graph;
    const bool expanded = trace::expand(graph, address, e->session->store(), &e->analysis->attribution.roles);
    apply_annotations(graph, meta.at("annotations"));
    const auto summary = app::summarize(*e->session, *e->analysis, graph, e->config);
    const int next = rev + 1;
    write_atomic(dir_of(id) / "graphs" / (std::to_string(next) + ".json"), app::trace_document(graph, summary));
    meta["revision"] = next;
    meta["audit"].push_back(Json{{"revision", next}, {"action", "expand"}, {"address", address.hex()}});
    write_atomic(dir_of(id) / "investigation.json", exporting::dump(meta));
    Json result{{"status", expanded ? "expanded" : "noop"}};
    if (!expanded) result["reason"] = "history_missing";
    result["revision"] = next;
    result["delta"] = delta_json(before, graph);
    return json_response(200, result);
}

Response Service::tag(const std::string& id, const Request& req) {
    const Json body = parse_body(req.body);
    const Address address = address_field(body, "address");
    const std::string category = body.value("category", "");
    const auto cat = chaindata::parse_tag_category(category);
    if (!cat) throw HttpError(400, "invalid_category", "unknown tag category '" + category + "'", Json{{"category", category}});
    const std::string label = trim(body.value("label", ""));
    if (label.empty()) throw HttpError(400, "invalid_label", "tag label must not be empty");

    auto e = entry(id);
    std::unique_lock lock(e->lock);
    Json meta = read_json(dir_of(id) / "investigation.json");
    const int rev = meta.at("revision").get<int>();
    auto graph = exporting::trace_from_json(read_json(dir_of(id) / "graphs" / (std::to_string(rev) + ".json")));
    const int next = rev + 1;

    Json superseded = nullptr;
    Json kept = Json::array();
    for (const auto& a : meta.at("annotations")) {
        if (a.at("address") == address.hex()) superseded = a;
        else kept.push_back(a);
    }
    const Json annotation{{"address", address.hex()}, {"category", category}, {"label", label}, {"revision", next}};
    kept.push_back(annotation);
    meta["annotations"] = kept;
    meta["audit"].push_back(Json{{"revision", next},
                                 {"action", "tag"},
                                 {"address", address.hex()},
                                 {"category", category},
                                 {"label", label},
                                 {"supersedes", superseded}});
    trace::apply_tag(graph, {address, *cat, label});
    const auto summary = app::summarize(*e->session, *e->analysis, graph, e->config);
    write_atomic(dir_of(id) / "graphs" / (std::to_string(next) + ".json"), app::trace_document(graph, summary));
    meta["revision"] = next;
    write_atomic(dir_of(id) / "investigation.json", exporting::dump(meta));
    return json_response(200, Json{{"revision", next}, {"annotation", annotation}, {"superseded", superseded}});
}

void Service::mount(httplib::Server& server) {
    const auto adapt = [this](const httplib::Request& hreq, httplib::Response& hres) {
        Request req;
        req.method = hreq.method;
        req.path = hreq.path;
        for (const auto& [k, v] : hreq.params) req.query.emplace(k, v);
        req.body = hreq.body;
        if (hreq.has_header("Idempotency-Key")) req.idempotency_key = hreq.get_header_value("Idempotency-Key");
        const Response r = handle(req);
        hres.status = r.status;
        hres.set_content(r.body, r.content_type);
    };
    server.Get("/", adapt);
    server.Get(R"(/investigations.*)", adapt);
    server.Post(R"(/investigations.*)", adapt);
    if (options_.static_dir) server.set_mount_point("/ui", options_.static_dir->string());
}

Options options_from_env() {
    Options o;
    const char* dir = std::getenv(kDataDirEnv);
    o.data_dir = dir && *dir ? fs::path(dir) : fs::path("rugtrace-data");
    return o;
}

std::pair<std::string, int> parse_bind(const std::string& bind) {
    const auto colon = bind.rfind(':');
    if (colon == std::string::npos || colon == 0) throw ConfigError("bind address must be host:port, got '" + bind + "'");
    int port = 0;
    try {
        port = std::stoi(bind.substr(colon + 1));
    } catch (const std::exception&) {
        throw ConfigError("bind address must be host:port, got '" + bind + "'");
    }
    if (port < 0 || port > 65535) throw ConfigError("port out of range in '" + bind + "'");
    return {bind.substr(0, colon), port};
}

void serve(Service& service, const std::string& bind) {
    const auto [host, port] = parse_bind(bind);
    httplib::Server server;
    service.mount(server);
    if (!server.bind_to_port(host, port)) throw ConfigError("cannot bind " + bind);
    std::cerr << "rugtrace service listening on " << host << ":" << port << " (data: " << service.options().data_dir.string()
              << ", no authentication)\n";
    server.listen_after_bind();
}

}  // namespace rugtrace::service
