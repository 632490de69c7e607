#include <algorithm>

#include "rugtrace/chaindata.hpp"
#include "rugtrace/errors.hpp"
#include "rugtrace/keccak.hpp"

namespace rugtrace::chaindata {

namespace signatures {
const Hash32& transfer() {
    static const Hash32 h = keccak256(std::string_view("Transfer(address,address,uint256)"));
    return h;
}
const Hash32& pair_created() {
    static const Hash32 h = keccak256(std::string_view("PairCreated(address,address,address,uint256)"));
    return h;
}
const Hash32& mint() {
    static const Hash32 h = keccak256(std::string_view("Mint(address,uint256,uint256)"));
    return h;
}
const Hash32& burn() {
    static const Hash32 h = keccak256(std::string_view("Burn(address,uint256,uint256,address)"));
    return h;
}
const Hash32& swap() {
    static const Hash32 h = keccak256(std::string_view("Swap(address,uint256,uint256,uint256,uint256,address)"));
    return h;
}
const Hash32& sync() {
    static const Hash32 h = keccak256(std::string_view("Sync(uint112,uint112)"));
    return h;
}
}  // namespace signatures

namespace {

constexpr std::size_t kWord = 32;

[[noreturn]] void malformed(std::string_view event, const LogEvent& log, const std::string& why) {
    throw MalformedEventError(std::string(event) + " log " + log.tx_hash.hex() + ":" + std::to_string(log.log_index) +
                              ": " + why);
}

Amount word_to_amount(ByteView word) {
    Amount v;
    boost::multiprecision::import_bits(v, word.begin(), word.end(), 8, true);
    return v;
}

void append_word(Bytes& out, const Amount& v) {
    if (v < 0) throw MalformedEventError("negative amount cannot be ABI-encoded");
    Bytes raw;
    if (v != 0) boost::multiprecision::export_bits(v, std::back_inserter(raw), 8, true);
    if (raw.size() > kWord) throw MalformedEventError("amount exceeds 256 bits");
    out.insert(out.end(), kWord - raw.size(), 0);
    out.insert(out.end(), raw.begin(), raw.end());
}

bool padding_clean(ByteView word, std::size_t significant) {
    return std::all_of(word.begin(), word.begin() + (kWord - significant), [](std::uint8_t b) { return b == 0; });
}

std::optional<Address> word_to_address(ByteView word) {
    if (!padding_clean(word, 20)) return std::nullopt;
    return Address::from_span(word.subspan(12));
}

Hash32 address_topic(const Address& a) {
    std::array<std::uint8_t, 32> raw{};
    std::copy(a.raw().begin(), a.raw().end(), raw.begin() + 12);
    return Hash32(raw);
}

void append_address(Bytes& out, const Address& a) {
    out.insert(out.end(), 12, 0);
    out.insert(out.end(), a.raw().begin(), a.raw().end());
}

class Reader {
public:
    Reader(std::string_view event, const LogEvent& log, std::size_t topics, std::size_t words)
        : event_(event), log_(log) {
        if (log.topics.size() != topics)
            malformed(event, log, "expected " + std::to_string(topics) + " topics, got " + std::to_string(log.topics.size()));
        if (log.data.size() != words * kWord)
            malformed(event, log, "expected " + std::to_string(words * kWord) + " data bytes, got " +
                                      std::to_string(log.data.size()));
    }

    Address topic_address(std::size_t i) const {
        auto a = word_to_address(log_.topics.at(i).view());
        if (!a) malformed(event_, log_, "topic " + std::to_string(i) + " is not a padded address");
        return *a;
    }
    ByteView word(std::size_t i) const { return ByteView(log_.data).subspan(i * kWord, kWord); }
    Amount uint(std::size_t i, std::size_t bits = 256) const {
        auto w = word(i);
        if (!padding_clean(w, bits / 8)) malformed(event_, log_, "word " + std::to_string(i) + " exceeds uint" + std::to_string(bits));
        return word_to_amount(w);
    }
    Address address(std::size_t i) const {
        auto a = word_to_address(word(i));
        if (!a) malformed(event_, log_, "word " + std::to_string(i) + " is not a padded address");
        return *a;
    }

private:
    std::string_view event_;
    const LogEvent& log_;
};

}  // namespace

std::string_view pair_event_name(const PairEventKind& kind) {
    struct V {
        std::string_view operator()(const PairCreated&) const { return "PairCreated"; }
        std::string_view operator()(const PairMint&) const { return "Mint"; }
        std::string_view operator()(const PairBurn&) const { return "Burn"; }
        std::string_view operator()(const PairSwap&) const { return "Swap"; }
        std::string_view operator()(const PairSync&) const { return "Sync"; }
    };
    return std::visit(V{}, kind);
}

std::optional<Erc20Transfer> decode_erc20_transfer(const LogEvent& log, int decimals) {
    if (log.topics.empty() || log.topics[0] != signatures::transfer()) return std::nullopt;
    Reader r("Transfer", log, 3, 1);
    Erc20Transfer t;
    t.token = log.emitter;
    t.from = r.topic_address(1);
    t.to = r.topic_address(2);
    t.amount = r.uint(0);
    t.decimals = decimals;
    t.tx_hash = log.tx_hash;
    t.log_index = log.log_index;
    return t;
}

LogEvent encode_erc20_transfer(const Erc20Transfer& t) {
    LogEvent log;
    log.emitter = t.token;
    log.topics = {signatures::transfer(), address_topic(t.from), address_topic(t.to)};
    append_word(log.data, t.amount);
    log.tx_hash = t.tx_hash;
    log.log_index = t.log_index;
    return log;
}

std::optional<PairEvent> decode_pair_event(const LogEvent& log) {
    if (log.topics.empty()) return std::nullopt;
    const Hash32& sig = log.topics[0];
    PairEvent ev;
    ev.pair = log.emitter;
    ev.tx_hash = log.tx_hash;
    ev.log_index = log.log_index;

    if (sig == signatures::pair_created()) {
        Reader r("PairCreated", log, 3, 2);
        PairCreated k;
        k.token0 = r.topic_address(1);
        k.token1 = r.topic_address(2);
        ev.pair = r.address(0);
        k.pair_index = r.uint(1);
        k.factory = log.emitter;
        ev.kind = k;
    } else if (sig == signatures::mint()) {
        Reader r("Mint", log, 2, 2);
        ev.kind = PairMint{r.topic_address(1), r.uint(0), r.uint(1)};
    } else if (sig == signatures::burn()) {
        Reader r("Burn", log, 3, 2);
        ev.kind = PairBurn{r.topic_address(1), r.uint(0), r.uint(1), r.topic_address(2)};
    } else if (sig == signatures::swap()) {
        Reader r("Swap", log, 3, 4);
        PairSwap k{r.topic_address(1), r.uint(0), r.uint(1), r.uint(2), r.uint(3), r.topic_address(2)};
        if (k.amount0_in + k.amount1_in == 0) malformed("Swap", log, "no input amount");
        if (k.amount0_out + k.amount1_out == 0) malformed("Swap", log, "no output amount");
        ev.kind = k;
    } else if (sig == signatures::sync()) {
        Reader r("Sync", log, 1, 2);
        ev.kind = PairSync{r.uint(0, 112), r.uint(1, 112)};
    } else {
        return std::nullopt;
    }
    return ev;
}

LogEvent encode_pair_event(const PairEvent& ev) {
    LogEvent log;
    log.emitter = ev.pair;
    log.tx_hash = ev.tx_hash;
    log.log_index = ev.log_index;
    struct V {
        LogEvent& log;
        const PairEvent& ev;
        void operator()(const PairCreated& k) {
            log.emitter = k.factory;
            log.topics = {signatures::pair_created(), address_topic(k.token0), address_topic(k.token1)};
            append_address(log.data, ev.pair);
            append_word(log.data, k.pair_index);
        }
        void operator()(const PairMint& k) {
            log.topics = {signatures::mint(), address_topic(k.sender)};
            append_word(log.data, k.amount0);
            append_word(log.data, k.amount1);
        }
        void operator()(const PairBurn& k) {
            log.topics = {signatures::burn(), address_topic(k.sender), address_topic(k.to)};
            append_word(log.data, k.amount0);
            append_word(log.data, k.amount1);
        }
        void operator()(const PairSwap& k) {
            log.topics = {signatures::swap(), address_topic(k.sender), address_topic(k.to)};
            append_word(log.data, k.amount0_in);
            append_word(log.data, k.amount1_in);
            append_word(log.data, k.amount0_out);
            append_word(log.data, k.amount1_out);
        }
        void operator()(const PairSync& k) {
            log.topics = {signatures::sync()};
            append_word(log.data, k.reserve0);
            append_word(log.data, k.reserve1);
        }
    };
    std::visit(V{log, ev}, ev.kind);
    return log;
}

}  // namespace rugtrace::chaindata
