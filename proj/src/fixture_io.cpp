#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "rugtrace/chaindata.hpp"
#include "rugtrace/keccak.hpp"
#include "rugtrace/errors.hpp"

namespace rugtrace::chaindata {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(TagCategory c) {
    switch (c) {
        case TagCategory::exchange: return "exchange";
        case TagCategory::mixer: return "mixer";
        case TagCategory::bridge: return "bridge";
        case TagCategory::gambling: return "gambling";
        case TagCategory::blocklist: return "blocklist";
        case TagCategory::other: return "other";
    }
    return "other";
}

std::optional<TagCategory> parse_tag_category(std::string_view s) {
    for (auto c : {TagCategory::exchange, TagCategory::mixer, TagCategory::bridge, TagCategory::gambling,
                   TagCategory::blocklist, TagCategory::other})
        if (to_string(c) == s) return c;
    return std::nullopt;
}

bool is_terminal(TagCategory c) {
    return c == TagCategory::exchange || c == TagCategory::mixer || c == TagCategory::bridge ||
           c == TagCategory::gambling || c == TagCategory::other;
}

void RateTable::set(std::string date, Rational usd_per_eth, std::string literal) {
    rates_[std::move(date)] = {std::move(usd_per_eth), std::move(literal)};
}

std::optional<Rational> RateTable::rate_on(const std::string& date) const {
    auto it = rates_.find(date);
    if (it == rates_.end()) return std::nullopt;
    return it->second.first;
}

std::optional<std::string> RateTable::literal_on(const std::string& date) const {
    auto it = rates_.find(date);
    if (it == rates_.end()) return std::nullopt;
    return it->second.second;
}

namespace {

struct Where {
    std::string file;
    std::size_t line = 0;
    std::string str() const { return line ? file + ":" + std::to_string(line) : file; }
};

[[noreturn]] void fail(const Where& w, const std::string& why) { throw LoadError(w.str() + ": " + why); }

const json& field(const json& obj, const char* name, const Where& w) {
    auto it = obj.find(name);
    if (it == obj.end()) fail(w, std::string("missing field '") + name + "'");
    return *it;
}

std::string str_field(const json& obj, const char* name, const Where& w) {
    const json& v = field(obj, name, w);
    if (!v.is_string()) fail(w, std::string("field '") + name + "' must be a string");
    return v.get<std::string>();
}

std::uint64_t uint_field(const json& obj, const char* name, const Where& w) {
    const json& v = field(obj, name, w);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
        fail(w, std::string("field '") + name + "' must be a non-negative integer");
    return v.get<std::uint64_t>();
}

template <class T>
T parse_fixed(const std::string& s, const char* name, const Where& w) {
    auto v = T::try_parse(s);
    if (!v) fail(w, std::string("field '") + name + "' is not a valid hex value: '" + s + "'");
    return *v;
}

Address address_field(const json& obj, const char* name, const Where& w) {
    return parse_fixed<Address>(str_field(obj, name, w), name, w);
}

Amount amount_field(const json& obj, const char* name, const Where& w) {
    const std::string s = str_field(obj, name, w);
    try {
        return parse_amount(s);
    } catch (const ParseError&) {
        fail(w, std::string("field '") + name + "' is not a decimal string: '" + s + "'");
    }
}

Rational parse_decimal_rational(const std::string& s, const Where& w) {
    std::string digits;
    std::size_t frac = 0;
    bool seen_dot = false;
    for (char c : s) {
        if (c == '.' && !seen_dot) {
            seen_dot = true;
        } else if (c >= '0' && c <= '9') {
            digits.push_back(c);
            if (seen_dot) ++frac;
        } else {
            fail(w, "rate '" + s + "' is not a non-negative decimal");
        }
    }
    if (digits.empty()) fail(w, "empty rate");
    return Rational(parse_amount(digits), pow10(static_cast<unsigned>(frac)));
}

template <class Fn>
void for_each_line(const fs::path& path, Fn&& fn) {
    std::ifstream in(path);
    if (!in) throw LoadError(path.string() + ": cannot open");
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        Where w{path.filename().string(), n};
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            fail(w, std::string("invalid JSON: ") + e.what());
        }
        if (!j.is_object()) fail(w, "record must be a JSON object");
        fn(j, w);
    }
}

json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw LoadError(path.string() + ": cannot open");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw LoadError(path.filename().string() + ": invalid JSON: " + e.what());
    }
}

Transaction parse_transaction(const json& j, const Where& w) {
    Transaction t;
    t.hash = parse_fixed<TxHash>(str_field(j, "hash", w), "hash", w);
    t.block_number = uint_field(j, "blockNumber", w);
    t.tx_index = static_cast<std::uint32_t>(uint_field(j, "txIndex", w));
    t.timestamp = static_cast<std::int64_t>(uint_field(j, "timestamp", w));
    t.from = address_field(j, "from", w);
    const json& to = field(j, "to", w);
    if (!to.is_null()) {
        if (!to.is_string()) fail(w, "field 'to' must be a string or null");
        t.to = parse_fixed<Address>(to.get<std::string>(), "to", w);
    }
    t.value = amount_field(j, "valueWei", w);
    const std::string status = str_field(j, "status", w);
    if (status == "success" || status == "1")
        t.status = TxStatus::success;
    else if (status == "failure" || status == "0")
        t.status = TxStatus::failure;
    else
        fail(w, "field 'status' must be 'success' or 'failure'");
    const json& sel = field(j, "inputSelector", w);
    if (!sel.is_null()) {
        if (!sel.is_string()) fail(w, "field 'inputSelector' must be a string or null");
        t.input_selector = parse_fixed<Selector>(sel.get<std::string>(), "inputSelector", w);
    }
    return t;
}

LogEvent parse_log(const json& j, const Where& w) {
    LogEvent l;
    l.emitter = address_field(j, "emitter", w);
    const json& topics = field(j, "topics", w);
    if (!topics.is_array()) fail(w, "field 'topics' must be an array");
    if (topics.size() > 4) fail(w, "at most 4 topics allowed");
    for (const auto& t : topics) {
        if (!t.is_string()) fail(w, "topics must be hex strings");
        l.topics.push_back(parse_fixed<Hash32>(t.get<std::string>(), "topics", w));
    }
    try {
        l.data = from_hex(str_field(j, "dataHex", w));
    } catch (const ParseError&) {
        fail(w, "field 'dataHex' is not valid hex");
    }
    l.tx_hash = parse_fixed<TxHash>(str_field(j, "txHash", w), "txHash", w);
    l.log_index = static_cast<std::uint32_t>(uint_field(j, "logIndex", w));
    return l;
}

ordered_json transaction_json(const Transaction& t) {
    ordered_json j;
    j["hash"] = t.hash.hex();
    j["blockNumber"] = t.block_number;
    j["txIndex"] = t.tx_index;
    j["timestamp"] = t.timestamp;
    j["from"] = t.from.hex();
    j["to"] = t.to ? ordered_json(t.to->hex()) : ordered_json(nullptr);
    j["valueWei"] = t.value.str();
    j["status"] = t.succeeded() ? "success" : "failure";
    j["inputSelector"] = t.input_selector ? ordered_json(t.input_selector->hex()) : ordered_json(nullptr);
    return j;
}

ordered_json log_json(const LogEvent& l) {
    ordered_json j;
    j["emitter"] = l.emitter.hex();
    ordered_json topics = ordered_json::array();
    for (const auto& t : l.topics) topics.push_back(t.hex());
    j["topics"] = topics;
    j["dataHex"] = to_hex(l.data);
    j["txHash"] = l.tx_hash.hex();
    j["logIndex"] = l.log_index;
    return j;
}

}  // namespace

RawBundle read_bundle(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw LoadError(dir.string() + ": fixture bundle directory not found");
    RawBundle b;

    if (auto p = dir / "transactions.jsonl"; fs::exists(p))
        for_each_line(p, [&](const json& j, const Where& w) { b.transactions.push_back(parse_transaction(j, w)); });
    if (auto p = dir / "logs.jsonl"; fs::exists(p))
        for_each_line(p, [&](const json& j, const Where& w) { b.logs.push_back(parse_log(j, w)); });

    if (auto p = dir / "tags.json"; fs::exists(p)) {
        json j = read_json_file(p);
        if (!j.is_array()) throw LoadError("tags.json: expected an array");
        for (std::size_t i = 0; i < j.size(); ++i) {
            Where w{"tags.json[" + std::to_string(i) + "]", 0};
            if (!j[i].is_object()) fail(w, "tag must be an object");
            AddressTag tag;
            tag.address = address_field(j[i], "address", w);
            const std::string cat = str_field(j[i], "category", w);
            auto c = parse_tag_category(cat);
            if (!c) fail(w, "unknown tag category '" + cat + "'");
            tag.category = *c;
            tag.label = str_field(j[i], "label", w);
            if (tag.label.empty()) fail(w, "tag label must be non-empty");
            b.tags.push_back(std::move(tag));
        }
    }

    if (auto p = dir / "tokens.json"; fs::exists(p)) {
        json j = read_json_file(p);
        if (j.is_object()) j = json::array({j});
        if (!j.is_array()) throw LoadError("tokens.json: expected an array of token objects");
        for (std::size_t i = 0; i < j.size(); ++i) {
            Where w{"tokens.json[" + std::to_string(i) + "]", 0};
            if (!j[i].is_object()) fail(w, "token must be an object");
            TokenInfo t;
            t.address = address_field(j[i], "address", w);
            const auto d = uint_field(j[i], "decimals", w);
            if (d > 77) fail(w, "decimals out of range");
            t.decimals = static_cast<int>(d);
            if (j[i].contains("name") && j[i]["name"].is_string()) t.name = j[i]["name"].get<std::string>();
            if (j[i].contains("symbol") && j[i]["symbol"].is_string()) t.symbol = j[i]["symbol"].get<std::string>();
            b.tokens.push_back(std::move(t));
        }
    }

    if (auto p = dir / "rates.json"; fs::exists(p)) {
        json j = read_json_file(p);
        if (!j.is_object()) throw LoadError("rates.json: expected an object of date -> usdPerEth");
        for (auto it = j.begin(); it != j.end(); ++it) {
            Where w{"rates.json[" + it.key() + "]", 0};
            std::string lit;
            if (it->is_string())
                lit = it->get<std::string>();
            else if (it->is_number())
                lit = it->dump();
            else
                fail(w, "rate must be a number or decimal string");
            b.rates.set(it.key(), parse_decimal_rational(lit, w), lit);
        }
    }
    return b;
}

std::vector<std::pair<std::string, std::string>> bundle_files(const RawBundle& bundle) {
    std::vector<const Transaction*> txs;
    for (const auto& t : bundle.transactions) txs.push_back(&t);
    std::sort(txs.begin(), txs.end(), [](auto* a, auto* b) { return a->position() < b->position(); });
    std::unordered_map<TxHash, Position> pos;
    for (auto* t : txs) pos[t->hash] = t->position();

    std::vector<std::pair<std::string, std::string>> files;
    {
        std::string out;
        for (auto* t : txs) out += transaction_json(*t).dump() + '\n';
        files.emplace_back("transactions.jsonl", std::move(out));
    }
    {
        std::vector<const LogEvent*> logs;
        for (const auto& l : bundle.logs) logs.push_back(&l);
        std::sort(logs.begin(), logs.end(), [&](auto* a, auto* b) {
            Position pa = pos.count(a->tx_hash) ? pos[a->tx_hash] : Position{};
            Position pb = pos.count(b->tx_hash) ? pos[b->tx_hash] : Position{};
            pa.log_index = a->log_index;
            pb.log_index = b->log_index;
            return pa < pb;
        });
        std::string out;
        for (auto* l : logs) out += log_json(*l).dump() + '\n';
        files.emplace_back("logs.jsonl", std::move(out));
    }
    {
        std::vector<const AddressTag*> tags;
        for (const auto& t : bundle.tags) tags.push_back(&t);
        std::sort(tags.begin(), tags.end(), [](auto* a, auto* b) { return a->address < b->address; });
        ordered_json arr = ordered_json::array();
        for (const auto* t : tags)
            arr.push_back({{"address", t->address.hex()}, {"category", to_string(t->category)}, {"label", t->label}});
        files.emplace_back("tags.json", arr.dump(2) + '\n');
    }
    {
        std::vector<const TokenInfo*> tokens;
        for (const auto& t : bundle.tokens) tokens.push_back(&t);
        std::sort(tokens.begin(), tokens.end(), [](auto* a, auto* b) { return a->address < b->address; });
        ordered_json arr = ordered_json::array();
        for (const auto* t : tokens) {
            ordered_json j{{"address", t->address.hex()}, {"decimals", t->decimals}};
            if (!t->name.empty()) j["name"] = t->name;
            if (!t->symbol.empty()) j["symbol"] = t->symbol;
            arr.push_back(j);
        }
        files.emplace_back("tokens.json", arr.dump(2) + '\n');
    }
    {
        ordered_json obj = ordered_json::object();
        for (const auto& [date, rate] : bundle.rates.entries()) obj[date] = rate.second;
        files.emplace_back("rates.json", obj.dump(2) + '\n');
    }
    return files;
}

void write_bundle(const RawBundle& bundle, const fs::path& dir) {
    fs::create_directories(dir);
    for (const auto& [name, content] : bundle_files(bundle))
        std::ofstream(dir / name, std::ios::trunc | std::ios::binary) << content;
}

Hash32 bundle_digest(const RawBundle& bundle) {
    std::string all;
    for (const auto& [name, content] : bundle_files(bundle)) all += name + '\n' + content;
    return keccak256(std::string_view(all));
}

}  // namespace rugtrace::chaindata
