#include <atomic>
#include <cstdlib>
#include <thread>

#include "doctest.h"
#include "fixture_util.hpp"
#include "httplib.h"
#include "rugtrace/app.hpp"
#include "rugtrace/errors.hpp"

using namespace rugtrace;
using chaindata::LogEvent;
using chaindata::Transaction;
using Json = nlohmann::json;

namespace {

std::string qty(std::uint64_t v) {
    std::ostringstream s;
    s << "0x" << std::hex << v;
    return s.str();
}

/// Etherscan-compatible server over a fixture bundle.
class MockExplorer {
public:
    explicit MockExplorer(chaindata::RawBundle bundle) : bundle_(std::move(bundle)) {
        for (const auto& t : bundle_.transactions) txs_[t.hash] = &t;
        std::sort(bundle_.logs.begin(), bundle_.logs.end(), [&](const LogEvent& a, const LogEvent& b) {
            const auto& x = *txs_.at(a.tx_hash);
            const auto& y = *txs_.at(b.tx_hash);
            return std::tie(x.block_number, x.tx_index, a.log_index) < std::tie(y.block_number, y.tx_index, b.log_index);
        });
        server_.Get("/api", [this](const httplib::Request& req, httplib::Response& res) { handle(req, res); });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~MockExplorer() {
        server_.stop();
        thread_.join();
    }

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/api"; }

    std::atomic<int> rate_limited{0};
    std::atomic<int> server_errors{0};
    std::atomic<bool> overlap{false};
    std::atomic<int> requests{0};
    std::string last_key;

private:
    void handle(const httplib::Request& req, httplib::Response& res) {
        ++requests;
        last_key = req.get_param_value("apikey");
        if (server_errors > 0) {
            --server_errors;
            res.status = 503;
            return;
        }
        if (rate_limited > 0) {
            --rate_limited;
            res.set_content(R"({"status":"0","message":"NOTOK","result":"Max rate limit reached"})", "application/json");
            return;
        }
        const std::string action = req.get_param_value("action");
        Json result;
        if (action == "getLogs") result = logs(req);
        else if (action == "txlist") result = txlist(req);
        else if (action == "eth_getTransactionByHash") {
            const auto* t = txs_.at(TxHash::parse(req.get_param_value("txhash")));
            result = Json{{"hash", t->hash.hex()},
                          {"blockNumber", qty(t->block_number)},
                          {"transactionIndex", qty(t->tx_index)},
                          {"from", t->from.hex()},
                          {"to", t->to ? Json(t->to->hex()) : Json(nullptr)},
                          {"value", "0x" + t->value.str(0, std::ios::hex)},
                          {"input", t->input_selector ? t->input_selector->hex() : "0x"}};
            res.set_content(Json{{"jsonrpc", "2.0"}, {"id", 1}, {"result", result}}.dump(), "application/json");
            return;
        } else if (action == "eth_getBlockByNumber") {
            const auto block = std::stoull(req.get_param_value("tag"), nullptr, 16);
            for (const auto& t : bundle_.transactions)
                if (t.block_number == block) result = Json{{"timestamp", qty(t.timestamp)}};
            res.set_content(Json{{"jsonrpc", "2.0"}, {"id", 1}, {"result", result}}.dump(), "application/json");
            return;
        } else if (action == "getcontractcreation") {
            const auto contract = Address::parse(req.get_param_value("contractaddresses"));
            for (const auto& l : bundle_.logs) {
                const auto* t = txs_.at(l.tx_hash);
                if (l.emitter == contract && t->is_creation()) {
                    result = Json::array({Json{{"contractAddress", contract.hex()},
                                               {"contractCreator", t->from.hex()},
                                               {"txHash", t->hash.hex()}}});
                    break;
                }
            }
            if (result.empty()) {
                res.set_content(R"({"status":"0","message":"No data found","result":null})", "application/json");
                return;
            }
        } else if (action == "getsourcecode") {
            result = Json::array({Json{{"SourceCode", "contract T { function transfer() public {} }"}}});
        }
        if (result.empty()) {
            res.set_content(R"({"status":"0","message":"No records found","result":[]})", "application/json");
            return;
        }
        res.set_content(Json{{"status", "1"}, {"message", "OK"}, {"result", result}}.dump(), "application/json");
    }

    static std::vector<Json> page_of(const std::vector<Json>& all, const httplib::Request& req) {
        const std::size_t page = std::stoul(req.get_param_value("page"));
        const std::size_t size = std::stoul(req.get_param_value("offset"));
        std::vector<Json> out;
        for (std::size_t i = (page - 1) * size; i < all.size() && i < page * size; ++i) out.push_back(all[i]);
        return out;
    }

    Json logs(const httplib::Request& req) {
        const auto addr = Address::parse(req.get_param_value("address"));
        const auto from = std::stoull(req.get_param_value("fromBlock"));
        std::vector<Json> all;
        for (const auto& l : bundle_.logs) {
            const auto& t = *txs_.at(l.tx_hash);
            if (l.emitter != addr || t.block_number < from) continue;
            bool match = true;
            for (int i = 0; i < 4; ++i) {
                const std::string key = "topic" + std::to_string(i);
                if (!req.has_param(key)) continue;
                match = match && static_cast<std::size_t>(i) < l.topics.size() &&
                        l.topics[i].hex() == req.get_param_value(key);
            }
            if (!match) continue;
            Json topics = Json::array();
            for (const auto& h : l.topics) topics.push_back(h.hex());
            all.push_back(Json{{"address", l.emitter.hex()},
                               {"topics", topics},
                               {"data", to_hex(l.data)},
                               {"blockNumber", qty(t.block_number)},
                               {"timeStamp", qty(t.timestamp)},
                               {"transactionHash", l.tx_hash.hex()},
                               {"transactionIndex", qty(t.tx_index)},
                               {"logIndex", qty(l.log_index)}});
        }
        auto page = page_of(all, req);
        if (overlap && req.get_param_value("page") == "2" && !page.empty()) {
            auto prev = page_of(all, [&] {
                httplib::Request r = req;
                r.params.erase("page");
                r.params.emplace("page", "1");
                return r;
            }());
            page.insert(page.begin(), prev.back());
        }
        return page.empty() ? Json() : Json(page);
    }

    Json txlist(const httplib::Request& req) {
        const auto addr = Address::parse(req.get_param_value("address"));
        const auto from = std::stoull(req.get_param_value("startblock"));
        std::vector<const Transaction*> txs;
        for (const auto& t : bundle_.transactions)
            if ((t.from == addr || t.to == addr) && t.block_number >= from) txs.push_back(&t);
        std::sort(txs.begin(), txs.end(), [](auto* a, auto* b) { return a->position() < b->position(); });
        std::vector<Json> all;
        for (const auto* t : txs)
            all.push_back(Json{{"hash", t->hash.hex()},
                               {"blockNumber", std::to_string(t->block_number)},
                               {"transactionIndex", std::to_string(t->tx_index)},
                               {"timeStamp", std::to_string(t->timestamp)},
                               {"from", t->from.hex()},
                               {"to", t->to ? t->to->hex() : ""},
                               {"value", t->value.str()},
                               {"isError", t->succeeded() ? "0" : "1"},
                               {"input", t->input_selector ? t->input_selector->hex() : "0x"}});
        auto page = page_of(all, req);
        return page.empty() ? Json() : Json(page);
    }

    chaindata::RawBundle bundle_;
    std::map<TxHash, const Transaction*> txs_;
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

live::LiveConfig config_for(const MockExplorer& m, const std::filesystem::path& cache) {
    live::LiveConfig c;
    c.base_url = m.url();
    c.requests_per_second = 0;
    c.page_size = 5;
    c.result_window = 15;
    c.backoff = std::chrono::milliseconds(1);
    c.max_retries = 3;
    c.cache_dir = cache;
    return c;
}

std::filesystem::path scratch(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("rugtrace-live-" + name);
    std::filesystem::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("live source rebuilds a fixture token through paginated queries") {
    const auto raw = chaindata::read_bundle(testutil::fixture_dir("fig2"));
    const auto token = raw.tokens.front().address;
    MockExplorer mock(raw);
    const auto cache = scratch("fig2");
    live::Source src(config_for(mock, cache), "k3y");
    src.fetch_token(token);
    CHECK(mock.last_key == "k3y");

    const auto live_store = chaindata::ChainStore::build(src.bundle());
    const auto fixture_store = chaindata::ChainStore::build(raw);
    const auto a = pipeline::analyze(live_store, token, {});
    const auto b = pipeline::analyze(fixture_store, token, {});
    CHECK(a.classification.verdict == b.classification.verdict);
    CHECK(a.classification.pump_and_dump == b.classification.pump_and_dump);
    CHECK(a.victims.victims == b.victims.victims);
    CHECK(live_store.transfers_of(token).size() == fixture_store.transfers_of(token).size());

    SUBCASE("cache is a readable bundle with the verified source") {
        const auto cached = chaindata::read_bundle(cache);
        CHECK(cached.logs.size() == src.bundle().logs.size());
        CHECK(std::filesystem::exists(cache / "contracts" / (token.hex() + ".sol")));
    }
    SUBCASE("history fetch follows txlist pages") {
        const Address someone = raw.transactions.front().from;
        const auto done = src.fetch_history({someone});
        CHECK(done.count(someone));
        const auto store = chaindata::ChainStore::build(src.bundle());
        CHECK(store.tx_count(someone) == fixture_store.tx_count(someone));
        CHECK(src.fetch_history({someone}).empty());
    }
}

TEST_CASE("overlapping pages are an integrity error") {
    const auto raw = chaindata::read_bundle(testutil::fixture_dir("fig2"));
    MockExplorer mock(raw);
    mock.overlap = true;
    live::Client client(config_for(mock, {}), "k");
    CHECK_THROWS_AS(client.logs(raw.tokens.front().address, {{0, chaindata::signatures::transfer()}}), IntegrityError);
}

TEST_CASE("rate limits and server errors are retried") {
    const auto raw = chaindata::read_bundle(testutil::fixture_dir("fig2"));
    MockExplorer mock(raw);
    live::Client client(config_for(mock, {}), "k");
    mock.rate_limited = 2;
    mock.server_errors = 1;
    const auto logs = client.logs(raw.tokens.front().address, {{0, chaindata::signatures::transfer()}});
    CHECK_FALSE(logs.empty());
    CHECK(mock.rate_limited == 0);
    CHECK(mock.server_errors == 0);

    mock.rate_limited = 10;
    CHECK_THROWS_AS(client.txlist(raw.transactions.front().from), TransportError);
}

TEST_CASE("unreachable endpoint gives a transport error") {
    live::LiveConfig c;
    c.base_url = "http://127.0.0.1:1/api";
    c.requests_per_second = 0;
    c.max_retries = 1;
    c.backoff = std::chrono::milliseconds(1);
    live::Client client(c, "k");
    CHECK_THROWS_AS(client.call({{"module", "account"}}), TransportError);
}

TEST_CASE("missing API key names the variable") {
    live::LiveConfig c;
    c.api_key_env = "RUGTRACE_TEST_UNSET_KEY";
    ::unsetenv(c.api_key_env.c_str());
    try {
        live::api_key_from_env(c);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("RUGTRACE_TEST_UNSET_KEY") != std::string::npos);
    }
    app::SourceSpec spec;
    spec.kind = "live";
    spec.live = c;
    spec.live.cache_dir = scratch("nokey");
    CHECK_THROWS_AS(app::Session::open(spec, std::nullopt), ConfigError);
}

TEST_CASE("live session trace fetches missing histories") {
    const auto raw = chaindata::read_bundle(testutil::fixture_dir("fig8"));
    const auto token = raw.tokens.front().address;
    MockExplorer mock(raw);
    ::setenv("RUGTRACE_TEST_KEY", "abc", 1);
    app::SourceSpec spec;
    spec.kind = "live";
    spec.live = config_for(mock, scratch("fig8"));
    spec.live.api_key_env = "RUGTRACE_TEST_KEY";
    spec.live.page_size = 50;
    spec.live.result_window = 10'000;
    spec.live.registry_dir = testutil::fixture_dir("fig8");
    auto session = app::Session::open(spec, token);
    pipeline::Config config;
    const auto analysis = app::analyze(*session, token, config);
    const auto graph = app::trace(*session, analysis, config);

    const auto fixture = chaindata::ChainStore::build(raw);
    const auto expected_analysis = pipeline::analyze(fixture, token, config);
    const auto expected = pipeline::run_trace(expected_analysis, fixture, config);
    std::set<Address> got, want;
    for (const auto& [a, n] : graph.nodes) got.insert(a);
    for (const auto& [a, n] : expected.nodes) want.insert(a);
    for (const auto& a : want)
        if (!got.count(a)) MESSAGE("missing " << a.hex());
    for (const auto& a : got)
        if (!want.count(a)) MESSAGE("extra " << a.hex());
    CHECK(got == want);

    auto resumed = app::Session::resume(spec);
    CHECK(resumed->store().transactions().size() == session->store().transactions().size());
}
