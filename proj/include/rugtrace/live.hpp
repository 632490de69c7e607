#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>

#include "json.hpp"
#include "rugtrace/chaindata.hpp"

namespace rugtrace::live {

using Json = nlohmann::json;

struct LiveConfig {
    /// Endpoint of an Etherscan-compatible API, e.g. https://api.etherscan.io/api
    std::string base_url = "https://api.etherscan.io/api";
    std::string api_key_env = "RUGTRACE_API_KEY";
    double requests_per_second = 5.0;
    std::size_t page_size = 1000;
    /// Providers stop paging after this many records per query.
    std::size_t result_window = 10'000;
    unsigned max_retries = 5;
    std::chrono::milliseconds backoff{500};
    Address factory = Address::parse("0x5c69bee701ef814a2b6a3edd4b1652cb9cc5aa6f");
    /// Fetched records are written here in fixture format.
    std::filesystem::path cache_dir;
    /// Directory with tags.json and rates.json merged into every fetch.
    std::optional<std::filesystem::path> registry_dir;
};

/// Reads the API key from the configured environment variable. Throws
/// ConfigError naming the variable when it is unset or empty.
std::string api_key_from_env(const LiveConfig& config);

/// Minimal Etherscan-style client: one request at a time through a rate
/// gate, retries with exponential backoff on rate limits and server errors.
class Client {
public:
    Client(LiveConfig config, std::string api_key);
    ~Client();

    /// Raw call. Returns the `result` member; an empty array for "no records".
    Json call(std::map<std::string, std::string> params);

    /// All logs of `address` matching the topic filters, in chain order.
    /// Throws IntegrityError when pages overlap or go backwards.
    std::vector<chaindata::LogEvent> logs(const Address& address, const std::map<int, Hash32>& topics,
                                          std::map<TxHash, std::int64_t>* timestamps = nullptr);
    /// Every normal transaction sent or received by `address`, in chain order.
    std::vector<chaindata::Transaction> txlist(const Address& address);
    std::optional<chaindata::Transaction> transaction(const TxHash& hash);
    std::int64_t block_timestamp(std::uint64_t block);
    /// (creator, creation tx) of a contract.
    std::optional<std::pair<Address, TxHash>> contract_creation(const Address& contract);
    /// Verified source code, if the explorer has one.
    std::optional<std::string> source_code(const Address& contract);

    std::size_t request_count() const { return requests_; }

private:
    void wait_turn();

    LiveConfig config_;
    std::string api_key_;
    std::string host_;
    std::string path_;
    std::mutex gate_;
    std::chrono::steady_clock::time_point next_slot_{};
    std::size_t requests_ = 0;
    std::map<std::uint64_t, std::int64_t> block_times_;
};

/// Accumulates fetched records into a bundle and mirrors it to the cache.
class Source {
public:
    Source(LiveConfig config, std::string api_key);

    /// Seeds the bundle from an existing cache directory, if present.
    void load_cache();

    /// Token logs, pair discovery and pair logs, the transactions behind
    /// them, the contract creation, the creator's history and the verified
    /// source (cached as contracts/<token>.sol).
    void fetch_token(const Address& token);
    /// Full transaction history of each address not fetched before.
    /// Returns the addresses that were fetched.
    std::set<Address> fetch_history(const std::set<Address>& addresses);

    const chaindata::RawBundle& bundle() const { return bundle_; }
    const std::set<Address>& fetched() const { return fetched_; }
    Client& client() { return client_; }

private:
    void add_tx(const chaindata::Transaction& tx);
    void add_log(const chaindata::LogEvent& log);
    void persist();

    LiveConfig config_;
    Client client_;
    chaindata::RawBundle bundle_;
    std::set<TxHash> tx_seen_;
    std::set<std::pair<TxHash, std::uint32_t>> log_seen_;
    std::set<Address> fetched_;
};

}  // namespace rugtrace::live
