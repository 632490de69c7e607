#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include "rugtrace/types.hpp"

namespace rugtrace::chaindata {

using Selector = FixedBytes<4>;

enum class TxStatus { success, failure };

struct Transaction {
    TxHash hash;
    std::uint64_t block_number = 0;
    std::uint32_t tx_index = 0;
    std::int64_t timestamp = 0;
    Address from;
    std::optional<Address> to;  // absent for contract creation
    Amount value = 0;
    TxStatus status = TxStatus::success;
    std::optional<Selector> input_selector;

    Position position() const { return {block_number, tx_index, -1}; }
    bool is_creation() const { return !to.has_value(); }
    bool succeeded() const { return status == TxStatus::success; }
};

struct LogEvent {
    Address emitter;
    std::vector<Hash32> topics;
    Bytes data;
    TxHash tx_hash;
    std::uint32_t log_index = 0;

    bool operator==(const LogEvent&) const = default;
};

struct Erc20Transfer {
    Address token;
    Address from;
    Address to;
    Amount amount = 0;
    int decimals = 18;
    TxHash tx_hash;
    std::uint32_t log_index = 0;

    bool is_mint() const { return from.is_zero(); }
    bool is_burn() const { return to.is_zero(); }
};

struct PairCreated {
    Address token0;
    Address token1;
    Amount pair_index = 0;  // allPairs.length after creation
    Address factory;        // emitter of the event
};
struct PairMint {
    Address sender;
    Amount amount0 = 0;
    Amount amount1 = 0;
};
struct PairBurn {
    Address sender;
    Amount amount0 = 0;
    Amount amount1 = 0;
    Address to;
};
struct PairSwap {
    Address sender;
    Amount amount0_in = 0;
    Amount amount1_in = 0;
    Amount amount0_out = 0;
    Amount amount1_out = 0;
    Address to;
};
struct PairSync {
    Amount reserve0 = 0;
    Amount reserve1 = 0;
};

using PairEventKind = std::variant<PairCreated, PairMint, PairBurn, PairSwap, PairSync>;

struct PairEvent {
    Address pair;
    PairEventKind kind;
    TxHash tx_hash;
    std::uint32_t log_index = 0;

    template <class T>
    const T* as() const { return std::get_if<T>(&kind); }
};

std::string_view pair_event_name(const PairEventKind& kind);

enum class TagCategory { exchange, mixer, bridge, gambling, blocklist, other };

std::string_view to_string(TagCategory c);
std::optional<TagCategory> parse_tag_category(std::string_view s);
/// Tagged services where tracing stops: funds that reach them cannot be
/// followed further on-chain.
bool is_terminal(TagCategory c);

struct AddressTag {
    Address address;
    TagCategory category = TagCategory::other;
    std::string label;
};

struct TokenInfo {
    Address address;
    int decimals = 18;
    std::string name;
    std::string symbol;
};

/// USD per ETH keyed by UTC date ("YYYY-MM-DD"). Rates are exact decimals.
class RateTable {
public:
    void set(std::string date, Rational usd_per_eth, std::string literal);
    std::optional<Rational> rate_on(const std::string& date) const;
    std::optional<std::string> literal_on(const std::string& date) const;
    bool empty() const { return rates_.empty(); }
    const std::map<std::string, std::pair<Rational, std::string>>& entries() const { return rates_; }

private:
    std::map<std::string, std::pair<Rational, std::string>> rates_;
};

namespace signatures {
const Hash32& transfer();      // Transfer(address,address,uint256)
const Hash32& pair_created();  // PairCreated(address,address,address,uint256)
const Hash32& mint();          // Mint(address,uint256,uint256)
const Hash32& burn();          // Burn(address,uint256,uint256,address)
const Hash32& swap();          // Swap(address,uint256,uint256,uint256,uint256,address)
const Hash32& sync();          // Sync(uint112,uint112)
}  // namespace signatures

/// Returns nullopt when topic[0] is not the ERC-20 Transfer signature.
/// Throws MalformedEventError when the signature matches but the layout
/// does not (topic count, data length, dirty address padding).
std::optional<Erc20Transfer> decode_erc20_transfer(const LogEvent& log, int decimals);
LogEvent encode_erc20_transfer(const Erc20Transfer& transfer);

/// Uniswap-V2 factory/pair events. Same error contract as the transfer decoder.
std::optional<PairEvent> decode_pair_event(const LogEvent& log);
LogEvent encode_pair_event(const PairEvent& event);

/// Records exactly as they appear in a fixture bundle.
struct RawBundle {
    std::vector<Transaction> transactions;
    std::vector<LogEvent> logs;
    std::vector<AddressTag> tags;
    std::vector<TokenInfo> tokens;
    RateTable rates;
};

/// Throws LoadError naming file and line for malformed records.
RawBundle read_bundle(const std::filesystem::path& dir);
/// Canonical serialization: records sorted by chain position, one JSON
/// object per line, stable field order.
void write_bundle(const RawBundle& bundle, const std::filesystem::path& dir);
/// File name and content of the canonical serialization.
std::vector<std::pair<std::string, std::string>> bundle_files(const RawBundle& bundle);
/// Keccak-256 over the canonical serialization.
Hash32 bundle_digest(const RawBundle& bundle);

struct DecodeIssue {
    TxHash tx_hash;
    std::uint32_t log_index = 0;
    std::string message;
};

struct TokenMeta {
    TokenInfo info;
    bool declared = false;  // present in tokens.json
    Amount total_supply = 0;
    std::optional<Address> creator;
    std::optional<TxHash> creation_tx;
};

/// Indexed, immutable view over one bundle. Readers may share a const store;
/// mutation happens only through `merge`, which requires exclusive access.
class ChainStore {
public:
    ChainStore() = default;

    /// Validates cross references and runs the decode pass. Throws
    /// IntegrityError for dangling tx references or position collisions.
    static ChainStore build(RawBundle bundle);

    /// Adds records (deduplicated by hash / (tx, log index)) and rebuilds
    /// every index.
    void merge(const RawBundle& extra);

    const RawBundle& raw() const { return raw_; }

    const std::vector<Transaction>& transactions() const { return raw_.transactions; }
    const Transaction* find_tx(const TxHash& hash) const;
    const Transaction& tx(const TxHash& hash) const;
    /// Transactions sent or received by `address`, in chain order.
    std::vector<const Transaction*> transactions_of(const Address& address) const;
    std::vector<const Transaction*> outgoing_of(const Address& address) const;
    std::vector<const Transaction*> incoming_of(const Address& address) const;
    std::size_t tx_count(const Address& address) const;
    /// Complete stores (fixtures) treat any address seen as a sender as
    /// having its history; partial stores (live) only fetched addresses.
    bool has_history(const Address& address) const;
    void mark_history_fetched(const Address& address);
    void set_partial(bool partial) { partial_ = partial; }

    const std::vector<LogEvent>& logs() const { return raw_.logs; }
    std::vector<const LogEvent*> logs_of_tx(const TxHash& hash) const;
    std::vector<const LogEvent*> logs_by_emitter(const Address& emitter) const;
    Position position_of(const LogEvent& log) const;
    Position position_of(const TxHash& tx, std::int64_t log_index) const;
    std::int64_t timestamp_of(const TxHash& tx) const;

    /// Decoded ERC-20 transfers emitted by `token`, in chain order.
    const std::vector<Erc20Transfer>& transfers_of(const Address& token) const;
    std::vector<Address> tokens_with_transfers() const;
    /// Distinct token contracts from which `holder` received transfers.
    std::size_t distinct_tokens_received(const Address& holder) const;

    const std::vector<PairEvent>& pair_events_of(const Address& pair) const;
    /// Pairs announced by PairCreated events, in chain order.
    const std::vector<PairEvent>& pair_creations() const { return pair_created_; }
    std::vector<Address> pairs_with_events() const;

    std::optional<AddressTag> tag_of(const Address& address) const;
    const std::vector<AddressTag>& tags() const { return raw_.tags; }

    std::optional<TokenMeta> token_meta(const Address& token) const;
    std::vector<Address> declared_tokens() const;
    const RateTable& rates() const { return raw_.rates; }

    /// Any address that emitted a log, was announced as a pair, or called a
    /// pair as the sender of a Mint, Burn or Swap.
    bool is_contract(const Address& address) const;

    const std::vector<DecodeIssue>& decode_issues() const { return issues_; }
    std::size_t unknown_log_count() const { return unknown_logs_; }

    std::int64_t latest_timestamp() const { return latest_timestamp_; }
    bool empty() const { return raw_.transactions.empty() && raw_.logs.empty(); }

private:
    void reindex();

    RawBundle raw_;
    std::unordered_map<TxHash, std::size_t> tx_by_hash_;
    std::unordered_map<Address, std::vector<std::size_t>> tx_by_address_;
    std::unordered_map<TxHash, std::vector<std::size_t>> logs_by_tx_;
    std::unordered_map<Address, std::vector<std::size_t>> logs_by_emitter_;
    std::unordered_map<Address, std::vector<Erc20Transfer>> transfers_;
    std::unordered_map<Address, std::unordered_set<Address>> tokens_received_;
    std::unordered_map<Address, std::vector<PairEvent>> pair_events_;
    std::vector<PairEvent> pair_created_;
    std::unordered_map<Address, std::size_t> tag_index_;
    std::unordered_map<Address, TokenMeta> token_meta_;
    std::unordered_set<Address> contracts_;
    std::unordered_set<Address> fetched_;
    bool partial_ = false;
    std::vector<DecodeIssue> issues_;
    std::size_t unknown_logs_ = 0;
    std::int64_t latest_timestamp_ = 0;
};

/// Loads and indexes a fixture bundle directory.
ChainStore load_fixture(const std::filesystem::path& dir);

/// Exact-match registry lookup; nullopt means untagged (not an error).
std::optional<AddressTag> lookup_tag(const Address& address, const ChainStore& store);

}  // namespace rugtrace::chaindata
