#include <algorithm>
#include <map>

#include "rugtrace/chaindata.hpp"
#include "rugtrace/errors.hpp"

namespace rugtrace::chaindata {

namespace {

bool same_tx(const Transaction& a, const Transaction& b) {
    return a.hash == b.hash && a.block_number == b.block_number && a.tx_index == b.tx_index &&
           a.timestamp == b.timestamp && a.from == b.from && a.to == b.to && a.value == b.value &&
           a.status == b.status && a.input_selector == b.input_selector;
}

const std::vector<Erc20Transfer> kNoTransfers;
const std::vector<PairEvent> kNoPairEvents;

}  // namespace

ChainStore ChainStore::build(RawBundle bundle) {
    ChainStore s;
    s.raw_ = std::move(bundle);
    s.reindex();
    return s;
}

void ChainStore::merge(const RawBundle& extra) {
    raw_.transactions.insert(raw_.transactions.end(), extra.transactions.begin(), extra.transactions.end());
    raw_.logs.insert(raw_.logs.end(), extra.logs.begin(), extra.logs.end());
    for (const auto& t : extra.tags) raw_.tags.push_back(t);
    for (const auto& t : extra.tokens) raw_.tokens.push_back(t);
    for (const auto& [date, r] : extra.rates.entries()) raw_.rates.set(date, r.first, r.second);
    reindex();
}

void ChainStore::reindex() {
    // Transactions: dedupe, order, check position uniqueness.
    {
        std::unordered_map<TxHash, std::size_t> seen;
        std::vector<Transaction> unique;
        unique.reserve(raw_.transactions.size());
        for (auto& t : raw_.transactions) {
            auto it = seen.find(t.hash);
            if (it != seen.end()) {
                if (!same_tx(unique[it->second], t))
                    throw IntegrityError("conflicting records for transaction " + t.hash.hex());
                continue;
            }
            seen.emplace(t.hash, unique.size());
            unique.push_back(std::move(t));
        }
        std::stable_sort(unique.begin(), unique.end(),
                         [](const Transaction& a, const Transaction& b) { return a.position() < b.position(); });
        for (std::size_t i = 1; i < unique.size(); ++i)
            if (unique[i].position() == unique[i - 1].position())
                throw IntegrityError("transactions " + unique[i - 1].hash.hex() + " and " + unique[i].hash.hex() +
                                     " share block " + std::to_string(unique[i].block_number) + " index " +
                                     std::to_string(unique[i].tx_index));
        raw_.transactions = std::move(unique);
    }

    tx_by_hash_.clear();
    tx_by_address_.clear();
    latest_timestamp_ = 0;
    for (std::size_t i = 0; i < raw_.transactions.size(); ++i) {
        const auto& t = raw_.transactions[i];
        tx_by_hash_.emplace(t.hash, i);
        tx_by_address_[t.from].push_back(i);
        if (t.to && *t.to != t.from) tx_by_address_[*t.to].push_back(i);
        latest_timestamp_ = std::max(latest_timestamp_, t.timestamp);
    }

    // Logs: every log must reference a stored transaction.
    {
        std::map<std::pair<Position, std::uint32_t>, std::size_t> seen;
        std::vector<LogEvent> unique;
        for (auto& l : raw_.logs) {
            auto it = tx_by_hash_.find(l.tx_hash);
            if (it == tx_by_hash_.end())
                throw IntegrityError("log " + std::to_string(l.log_index) + " references missing transaction " +
                                     l.tx_hash.hex());
            const Position p = raw_.transactions[it->second].position();
            auto key = std::make_pair(p, l.log_index);
            auto found = seen.find(key);
            if (found != seen.end()) {
                if (!(unique[found->second] == l))
                    throw IntegrityError("conflicting records for log " + l.tx_hash.hex() + ":" +
                                         std::to_string(l.log_index));
                continue;
            }
            seen.emplace(key, unique.size());
            unique.push_back(std::move(l));
        }
        std::vector<LogEvent> ordered;
        ordered.reserve(unique.size());
        for (auto& [key, idx] : seen) ordered.push_back(std::move(unique[idx]));
        raw_.logs = std::move(ordered);
    }

    // Registry.
    tag_index_.clear();
    {
        std::vector<AddressTag> tags;
        for (auto& t : raw_.tags) {
            auto it = tag_index_.find(t.address);
            if (it != tag_index_.end()) {
                const auto& prev = tags[it->second];
                if (prev.category != t.category)
                    throw IntegrityError("address " + t.address.hex() + " tagged with two categories");
                continue;
            }
            tag_index_.emplace(t.address, tags.size());
            tags.push_back(std::move(t));
        }
        raw_.tags = std::move(tags);
    }

    std::unordered_map<Address, TokenInfo> declared;
    for (const auto& t : raw_.tokens) declared[t.address] = t;

    // Decode pass.
    logs_by_tx_.clear();
    logs_by_emitter_.clear();
    transfers_.clear();
    tokens_received_.clear();
    pair_events_.clear();
    pair_created_.clear();
    contracts_.clear();
    issues_.clear();
    unknown_logs_ = 0;
    for (std::size_t i = 0; i < raw_.logs.size(); ++i) {
        const LogEvent& l = raw_.logs[i];
        logs_by_tx_[l.tx_hash].push_back(i);
        logs_by_emitter_[l.emitter].push_back(i);
        contracts_.insert(l.emitter);
        try {
            auto dit = declared.find(l.emitter);
            const int decimals = dit != declared.end() ? dit->second.decimals : 18;
            if (auto t = decode_erc20_transfer(l, decimals)) {
                transfers_[t->token].push_back(*t);
                tokens_received_[t->to].insert(t->token);
                continue;
            }
            if (auto p = decode_pair_event(l)) {
                if (p->as<PairCreated>()) {
                    pair_created_.push_back(*p);
                    contracts_.insert(p->pair);
                } else {
                    pair_events_[p->pair].push_back(*p);
                    // Routers calling the pair are contracts too.
                    if (const auto* m = p->as<PairMint>()) contracts_.insert(m->sender);
                    if (const auto* b = p->as<PairBurn>()) contracts_.insert(b->sender);
                    if (const auto* s = p->as<PairSwap>()) contracts_.insert(s->sender);
                }
                continue;
            }
            ++unknown_logs_;
        } catch (const MalformedEventError& e) {
            issues_.push_back({l.tx_hash, l.log_index, e.what()});
        }
    }

    // Token metadata.
    token_meta_.clear();
    auto meta_for = [&](const Address& token) -> TokenMeta& {
        auto [it, inserted] = token_meta_.try_emplace(token);
        if (inserted) {
            auto dit = declared.find(token);
            it->second.declared = dit != declared.end();
            it->second.info = it->second.declared ? dit->second : TokenInfo{token, 18, {}, {}};
        }
        return it->second;
    };
    for (const auto& [token, _] : declared) meta_for(token);
    for (const auto& [token, list] : transfers_) {
        TokenMeta& m = meta_for(token);
        for (const auto& t : list) {
            if (t.is_mint()) m.total_supply += t.amount;
            if (t.is_burn()) m.total_supply -= t.amount;
        }
    }
    for (auto& [token, m] : token_meta_) {
        auto it = logs_by_emitter_.find(token);
        if (it == logs_by_emitter_.end()) continue;
        for (std::size_t idx : it->second) {
            const Transaction& tx = raw_.transactions[tx_by_hash_.at(raw_.logs[idx].tx_hash)];
            if (tx.is_creation()) {
                m.creator = tx.from;
                m.creation_tx = tx.hash;
                break;
            }
        }
    }
}

const Transaction* ChainStore::find_tx(const TxHash& hash) const {
    auto it = tx_by_hash_.find(hash);
    return it == tx_by_hash_.end() ? nullptr : &raw_.transactions[it->second];
}

const Transaction& ChainStore::tx(const TxHash& hash) const {
    const Transaction* t = find_tx(hash);
    if (!t) throw NotFoundError("transaction " + hash.hex() + " not in store");
    return *t;
}

std::vector<const Transaction*> ChainStore::transactions_of(const Address& address) const {
    std::vector<const Transaction*> out;
    auto it = tx_by_address_.find(address);
    if (it == tx_by_address_.end()) return out;
    for (std::size_t i : it->second) out.push_back(&raw_.transactions[i]);
    return out;
}

std::vector<const Transaction*> ChainStore::outgoing_of(const Address& address) const {
    std::vector<const Transaction*> out;
    for (const auto* t : transactions_of(address))
        if (t->from == address) out.push_back(t);
    return out;
}

std::vector<const Transaction*> ChainStore::incoming_of(const Address& address) const {
    std::vector<const Transaction*> out;
    for (const auto* t : transactions_of(address))
        if (t->to && *t->to == address) out.push_back(t);
    return out;
}

std::size_t ChainStore::tx_count(const Address& address) const {
    auto it = tx_by_address_.find(address);
    return it == tx_by_address_.end() ? 0 : it->second.size();
}

bool ChainStore::has_history(const Address& address) const {
    if (fetched_.count(address)) return true;
    if (partial_) return false;
    auto it = tx_by_address_.find(address);
    if (it == tx_by_address_.end()) return false;
    for (std::size_t i : it->second)
        if (raw_.transactions[i].from == address) return true;
    return false;
}

void ChainStore::mark_history_fetched(const Address& address) { fetched_.insert(address); }

std::vector<const LogEvent*> ChainStore::logs_of_tx(const TxHash& hash) const {
    std::vector<const LogEvent*> out;
    auto it = logs_by_tx_.find(hash);
    if (it == logs_by_tx_.end()) return out;
    for (std::size_t i : it->second) out.push_back(&raw_.logs[i]);
    return out;
}

std::vector<const LogEvent*> ChainStore::logs_by_emitter(const Address& emitter) const {
    std::vector<const LogEvent*> out;
    auto it = logs_by_emitter_.find(emitter);
    if (it == logs_by_emitter_.end()) return out;
    for (std::size_t i : it->second) out.push_back(&raw_.logs[i]);
    return out;
}

Position ChainStore::position_of(const TxHash& tx_hash, std::int64_t log_index) const {
    Position p = tx(tx_hash).position();
    p.log_index = log_index;
    return p;
}

Position ChainStore::position_of(const LogEvent& log) const { return position_of(log.tx_hash, log.log_index); }

std::int64_t ChainStore::timestamp_of(const TxHash& tx_hash) const { return tx(tx_hash).timestamp; }

const std::vector<Erc20Transfer>& ChainStore::transfers_of(const Address& token) const {
    auto it = transfers_.find(token);
    return it == transfers_.end() ? kNoTransfers : it->second;
}

std::vector<Address> ChainStore::tokens_with_transfers() const {
    std::vector<Address> out;
    for (const auto& [token, _] : transfers_) out.push_back(token);
    std::sort(out.begin(), out.end());
    return out;
}

std::size_t ChainStore::distinct_tokens_received(const Address& holder) const {
    auto it = tokens_received_.find(holder);
    return it == tokens_received_.end() ? 0 : it->second.size();
}

const std::vector<PairEvent>& ChainStore::pair_events_of(const Address& pair) const {
    auto it = pair_events_.find(pair);
    return it == pair_events_.end() ? kNoPairEvents : it->second;
}

std::vector<Address> ChainStore::pairs_with_events() const {
    std::vector<Address> out;
    for (const auto& [pair, _] : pair_events_) out.push_back(pair);
    std::sort(out.begin(), out.end());
    return out;
}

std::optional<AddressTag> ChainStore::tag_of(const Address& address) const {
    auto it = tag_index_.find(address);
    if (it == tag_index_.end()) return std::nullopt;
    return raw_.tags[it->second];
}

std::optional<TokenMeta> ChainStore::token_meta(const Address& token) const {
    auto it = token_meta_.find(token);
    if (it == token_meta_.end()) return std::nullopt;
    return it->second;
}

std::vector<Address> ChainStore::declared_tokens() const {
    std::vector<Address> out;
    for (const auto& t : raw_.tokens) out.push_back(t.address);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool ChainStore::is_contract(const Address& address) const { return contracts_.count(address) > 0; }

ChainStore load_fixture(const std::filesystem::path& dir) { return ChainStore::build(read_bundle(dir)); }

std::optional<AddressTag> lookup_tag(const Address& address, const ChainStore& store) { return store.tag_of(address); }

}  // namespace rugtrace::chaindata
