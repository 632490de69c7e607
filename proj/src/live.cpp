#include "rugtrace/live.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "rugtrace/errors.hpp"

namespace rugtrace::live {

namespace {

using chaindata::LogEvent;
using chaindata::Transaction;

std::string str(const Json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_string()) throw TransportError(std::string("response record lacks '") + key + "'");
    return j[key].get<std::string>();
}

Amount hex_quantity(const std::string& s) {
    std::string_view v = s;
    if (v.rfind("0x", 0) == 0) v.remove_prefix(2);
    Amount out = 0;
    for (char c : v) {
        int d;
        if (c >= '0' && c <= '9') d = c - '0';
        else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
        else if (c >= 'A' && c <= 'F') d = c - 'A' + 10;
        else throw TransportError("invalid hex quantity '" + s + "'");
        out = out * 16 + d;
    }
    return out;
}

/// Etherscan mixes decimal and 0x-prefixed quantities between endpoints.
Amount quantity(const std::string& s) {
    if (s.rfind("0x", 0) == 0) return hex_quantity(s);
    if (s.empty()) return 0;
    return parse_amount(s);
}

template <class T>
T small(const std::string& s) {
    return static_cast<T>(quantity(s));
}

std::optional<chaindata::Selector> selector_of(const std::string& input) {
    if (input.size() < 10) return std::nullopt;
    return chaindata::Selector::try_parse(input.substr(0, 10));
}

Transaction tx_from_list(const Json& j) {
    Transaction t;
    t.hash = TxHash::parse(str(j, "hash"));
    t.block_number = small<std::uint64_t>(str(j, "blockNumber"));
    t.tx_index = small<std::uint32_t>(str(j, "transactionIndex"));
    t.timestamp = small<std::int64_t>(str(j, "timeStamp"));
    t.from = Address::parse(str(j, "from"));
    const std::string to = j.value("to", "");
    if (!to.empty()) t.to = Address::parse(to);
    t.value = quantity(str(j, "value"));
    t.status = j.value("isError", "0") == "1" ? chaindata::TxStatus::failure : chaindata::TxStatus::success;
    t.input_selector = selector_of(j.value("input", ""));
    return t;
}

LogEvent log_from(const Json& j) {
    LogEvent l;
    l.emitter = Address::parse(str(j, "address"));
    for (const auto& t : j.at("topics"))
        if (t.is_string()) l.topics.push_back(Hash32::parse(t.get<std::string>()));
    l.data = from_hex(str(j, "data"));
    l.tx_hash = TxHash::parse(str(j, "transactionHash"));
    l.log_index = small<std::uint32_t>(str(j, "logIndex"));
    return l;
}

struct Ordered {
    std::uint64_t block;
    std::uint32_t tx_index;
    std::uint32_t log_index;
    auto operator<=>(const Ordered&) const = default;
};

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

}  // namespace

std::string api_key_from_env(const LiveConfig& config) {
    const char* v = std::getenv(config.api_key_env.c_str());
    if (!v || !*v) throw ConfigError("live mode requires an API key in the environment variable " + config.api_key_env);
    return v;
}

Client::Client(LiveConfig config, std::string api_key) : config_(std::move(config)), api_key_(std::move(api_key)) {
    const auto scheme = config_.base_url.find("://");
    if (scheme == std::string::npos) throw ConfigError("live endpoint must be an http(s) URL: " + config_.base_url);
    const auto slash = config_.base_url.find('/', scheme + 3);
    host_ = config_.base_url.substr(0, slash);
    path_ = slash == std::string::npos ? "/" : config_.base_url.substr(slash);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (config_.base_url.rfind("https://", 0) == 0)
        throw ConfigError("this build has no TLS support; use an http:// endpoint");
#endif
    if (config_.page_size == 0) throw ConfigError("page size must be positive");
}

Client::~Client() = default;

void Client::wait_turn() {
    std::unique_lock lock(gate_);
    const auto now = std::chrono::steady_clock::now();
    if (next_slot_ > now) std::this_thread::sleep_for(next_slot_ - now);
    const auto interval = std::chrono::duration<double>(
        config_.requests_per_second > 0 ? 1.0 / config_.requests_per_second : 0.0);
    next_slot_ = std::chrono::steady_clock::now() + std::chrono::duration_cast<std::chrono::steady_clock::duration>(interval);
}

Json Client::call(std::map<std::string, std::string> params) {
    params["apikey"] = api_key_;
    httplib::Params query(params.begin(), params.end());
    std::string last_error;
    for (unsigned attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(config_.backoff * (1u << std::min(attempt - 1, 6u)));
        wait_turn();
        ++requests_;
        httplib::Client http(host_);
        http.set_connection_timeout(10);
        http.set_read_timeout(30);
        auto res = http.Get(path_, query, httplib::Headers{});
        if (!res) {
            last_error = "request failed: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) throw TransportError("HTTP " + std::to_string(res->status) + " from " + host_);
        Json body;
        try {
            body = Json::parse(res->body);
        } catch (const Json::exception&) {
            throw TransportError("unparseable response from " + host_);
        }
        if (body.contains("jsonrpc")) {
            if (body.contains("error")) throw TransportError("RPC error: " + body["error"].dump());
            return body.value("result", Json());
        }
        const std::string status = body.value("status", "");
        const std::string message = body.value("message", "");
        const Json result = body.value("result", Json());
        if (status == "1") return result;
        const std::string detail = result.is_string() ? result.get<std::string>() : message;
        if (lower(detail).find("rate limit") != std::string::npos) {
            last_error = detail;
            continue;
        }
        if (lower(message).find("no transactions found") != std::string::npos ||
            lower(message).find("no data found") != std::string::npos ||
            lower(message).find("no records found") != std::string::npos)
            return Json::array();
        throw TransportError("API error: " + message + (detail.empty() ? "" : " (" + detail + ")"));
    }
    throw TransportError("giving up after " + std::to_string(config_.max_retries + 1) + " attempts: " + last_error);
}

std::vector<LogEvent> Client::logs(const Address& address, const std::map<int, Hash32>& topics,
                                   std::map<TxHash, std::int64_t>* timestamps) {
    std::vector<LogEvent> out;
    std::set<std::pair<TxHash, std::uint32_t>> seen;
    std::optional<Ordered> last;
    std::uint64_t from_block = 0;
    for (;;) {
        bool restart = false;
        for (std::size_t page = 1;; ++page) {
            std::map<std::string, std::string> p{{"module", "logs"},
                                                 {"action", "getLogs"},
                                                 {"address", address.hex()},
                                                 {"fromBlock", std::to_string(from_block)},
                                                 {"toBlock", "latest"},
                                                 {"page", std::to_string(page)},
                                                 {"offset", std::to_string(config_.page_size)}};
            for (const auto& [i, t] : topics) p["topic" + std::to_string(i)] = t.hex();
            if (topics.size() > 1)
                for (const auto& [i, t] : topics)
                    for (const auto& [k, u] : topics)
                        if (i < k) p["topic" + std::to_string(i) + "_" + std::to_string(k) + "_opr"] = "and";
            const Json res = call(p);
            if (!res.is_array()) throw TransportError("getLogs returned a non-array result");
            for (const auto& r : res) {
                LogEvent l = log_from(r);
                const Ordered key{small<std::uint64_t>(str(r, "blockNumber")),
                                  small<std::uint32_t>(r.value("transactionIndex", "0x0")), l.log_index};
                const bool dup = !seen.insert({l.tx_hash, l.log_index}).second;
                if (dup) {
                    // Re-reading the boundary block after a restart repeats records.
                    if (from_block > 0 && key.block == from_block) continue;
                    throw IntegrityError("inconsistent pagination: log " + l.tx_hash.hex() + ":" +
                                         std::to_string(l.log_index) + " returned twice");
                }
                if (last && key < *last)
                    throw IntegrityError("inconsistent pagination: logs of " + address.hex() + " out of order at " +
                                         l.tx_hash.hex());
                last = key;
                if (timestamps && r.contains("timeStamp"))
                    (*timestamps)[l.tx_hash] = small<std::int64_t>(str(r, "timeStamp"));
                out.push_back(std::move(l));
            }
            if (res.size() < config_.page_size) return out;
            if (page * config_.page_size >= config_.result_window) {
                from_block = last->block;
                restart = true;
                break;
            }
        }
        if (!restart) return out;
    }
}

std::vector<Transaction> Client::txlist(const Address& address) {
    std::vector<Transaction> out;
    std::set<TxHash> seen;
    std::optional<Position> last;
    std::uint64_t start_block = 0;
    for (;;) {
        for (std::size_t page = 1;; ++page) {
            const Json res = call({{"module", "account"},
                                   {"action", "txlist"},
                                   {"address", address.hex()},
                                   {"startblock", std::to_string(start_block)},
                                   {"endblock", "99999999"},
                                   {"page", std::to_string(page)},
                                   {"offset", std::to_string(config_.page_size)},
                                   {"sort", "asc"}});
            if (!res.is_array()) throw TransportError("txlist returned a non-array result");
            for (const auto& r : res) {
                Transaction t = tx_from_list(r);
                if (!seen.insert(t.hash).second) {
                    if (start_block > 0 && t.block_number == start_block) continue;
                    throw IntegrityError("inconsistent pagination: transaction " + t.hash.hex() + " returned twice");
                }
                if (last && t.position() < *last)
                    throw IntegrityError("inconsistent pagination: history of " + address.hex() + " out of order at " +
                                         t.hash.hex());
                last = t.position();
                block_times_[t.block_number] = t.timestamp;
                out.push_back(std::move(t));
            }
            if (res.size() < config_.page_size) return out;
            if (page * config_.page_size >= config_.result_window) {
                start_block = last->block;
                break;
            }
        }
    }
}

std::int64_t Client::block_timestamp(std::uint64_t block) {
    if (auto it = block_times_.find(block); it != block_times_.end()) return it->second;
    std::ostringstream hex;
    hex << "0x" << std::hex << block;
    const Json res = call({{"module", "proxy"}, {"action", "eth_getBlockByNumber"}, {"tag", hex.str()}, {"boolean", "false"}});
    if (!res.is_object()) throw TransportError("block " + std::to_string(block) + " not found");
    const auto ts = small<std::int64_t>(str(res, "timestamp"));
    block_times_[block] = ts;
    return ts;
}

std::optional<Transaction> Client::transaction(const TxHash& hash) {
    const Json res = call({{"module", "proxy"}, {"action", "eth_getTransactionByHash"}, {"txhash", hash.hex()}});
    if (!res.is_object()) return std::nullopt;
    Transaction t;
    t.hash = TxHash::parse(str(res, "hash"));
    t.block_number = small<std::uint64_t>(str(res, "blockNumber"));
    t.tx_index = small<std::uint32_t>(str(res, "transactionIndex"));
    t.from = Address::parse(str(res, "from"));
    if (res.contains("to") && res["to"].is_string() && !res["to"].get<std::string>().empty())
        t.to = Address::parse(res["to"].get<std::string>());
    t.value = hex_quantity(str(res, "value"));
    t.input_selector = selector_of(res.value("input", ""));
    t.timestamp = block_timestamp(t.block_number);
    return t;
}

std::optional<std::pair<Address, TxHash>> Client::contract_creation(const Address& contract) {
    const Json res = call({{"module", "contract"}, {"action", "getcontractcreation"}, {"contractaddresses", contract.hex()}});
    if (!res.is_array() || res.empty()) return std::nullopt;
    return std::make_pair(Address::parse(str(res[0], "contractCreator")), TxHash::parse(str(res[0], "txHash")));
}

std::optional<std::string> Client::source_code(const Address& contract) {
    const Json res = call({{"module", "contract"}, {"action", "getsourcecode"}, {"address", contract.hex()}});
    if (!res.is_array() || res.empty() || !res[0].is_object()) return std::nullopt;
    const std::string src = res[0].value("SourceCode", "");
    if (src.empty()) return std::nullopt;
    return src;
}

Source::Source(LiveConfig config, std::string api_key)
    : config_(config), client_(std::move(config), std::move(api_key)) {
    if (config_.registry_dir) {
        auto reg = chaindata::read_bundle(*config_.registry_dir);
        bundle_.tags = std::move(reg.tags);
        bundle_.rates = std::move(reg.rates);
        bundle_.tokens = std::move(reg.tokens);
    }
}

void Source::load_cache() {
    if (config_.cache_dir.empty() || !std::filesystem::exists(config_.cache_dir / "transactions.jsonl")) return;
    auto cached = chaindata::read_bundle(config_.cache_dir);
    for (const auto& tx : cached.transactions) add_tx(tx);
    for (const auto& l : cached.logs) add_log(l);
    for (const auto& t : cached.tokens)
        if (std::none_of(bundle_.tokens.begin(), bundle_.tokens.end(), [&](const auto& x) { return x.address == t.address; }))
            bundle_.tokens.push_back(t);
}

void Source::add_tx(const Transaction& tx) {
    if (tx_seen_.insert(tx.hash).second) bundle_.transactions.push_back(tx);
}

void Source::add_log(const LogEvent& log) {
    if (log_seen_.insert({log.tx_hash, log.log_index}).second) bundle_.logs.push_back(log);
}

void Source::persist() {
    if (!config_.cache_dir.empty()) chaindata::write_bundle(bundle_, config_.cache_dir);
}

void Source::fetch_token(const Address& token) {
    std::map<TxHash, std::int64_t> times;
    std::vector<LogEvent> logs = client_.logs(token, {{0, chaindata::signatures::transfer()}}, &times);

    Hash32 token_topic;
    {
        std::array<std::uint8_t, 32> raw{};
        std::copy(token.raw().begin(), token.raw().end(), raw.begin() + 12);
        token_topic = Hash32(raw);
    }
    std::set<Address> pairs;
    for (int slot : {1, 2}) {
        for (auto& l : client_.logs(config_.factory, {{0, chaindata::signatures::pair_created()}, {slot, token_topic}},
                                    &times)) {
            if (auto ev = chaindata::decode_pair_event(l)) pairs.insert(ev->pair);
            logs.push_back(std::move(l));
        }
    }
    for (const Address& pair : pairs)
        for (auto& l : client_.logs(pair, {}, &times)) logs.push_back(std::move(l));

    std::set<TxHash> hashes;
    for (const auto& l : logs) hashes.insert(l.tx_hash);
    std::optional<Address> creator;
    if (auto creation = client_.contract_creation(token)) {
        creator = creation->first;
        hashes.insert(creation->second);
    }
    for (const TxHash& h : hashes) {
        if (tx_seen_.count(h)) continue;
        auto tx = client_.transaction(h);
        if (!tx) throw IntegrityError("transaction " + h.hex() + " referenced by a log was not found");
        if (auto it = times.find(h); it != times.end()) tx->timestamp = it->second;
        add_tx(*tx);
    }
    for (const auto& l : logs) add_log(l);
    if (std::none_of(bundle_.tokens.begin(), bundle_.tokens.end(), [&](const auto& t) { return t.address == token; }))
        bundle_.tokens.push_back({token, 18, "", ""});
    persist();
    if (auto src = client_.source_code(token); src && !config_.cache_dir.empty()) {
        std::filesystem::create_directories(config_.cache_dir / "contracts");
        std::ofstream(config_.cache_dir / "contracts" / (token.hex() + ".sol"), std::ios::binary) << *src;
    }
    if (creator) fetch_history({*creator});
}

std::set<Address> Source::fetch_history(const std::set<Address>& addresses) {
    std::set<Address> done;
    for (const Address& a : addresses) {
        if (fetched_.count(a)) continue;
        for (const auto& tx : client_.txlist(a)) add_tx(tx);
        fetched_.insert(a);
        done.insert(a);
    }
    if (!done.empty()) persist();
    return done;
}

}  // namespace rugtrace::live
