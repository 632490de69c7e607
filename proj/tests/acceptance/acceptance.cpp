// Acceptance checks. One line per criterion: PASS|FAIL <name> (<seconds>s) <detail>.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "rugtrace/app.hpp"
#include "rugtrace/errors.hpp"
#include "rugtrace/export.hpp"
#include "rugtrace/keccak.hpp"
#include "rugtrace/service.hpp"

using namespace rugtrace;
using chaindata::LogEvent;
using chaindata::RawBundle;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string fixture_dir(const std::string& name) { return std::string(RUGTRACE_FIXTURES_DIR) + "/" + name; }

json expected(const std::string& name) {
    std::ifstream in(fixture_dir(name) + "/expected.json");
    return json::parse(in);
}

Address addr(const json& j) { return Address::parse(j.get<std::string>()); }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Collects mismatches; a criterion passes when none were recorded.
struct Problems {
    std::vector<std::string> items;
    std::vector<std::string> notes;

    void fail(std::string what) { items.push_back(std::move(what)); }
    void expect(bool ok, const std::string& what) {
        if (!ok) fail(what);
    }
    void note(std::string what) { notes.push_back(std::move(what)); }
};

std::string join(const std::vector<std::string>& v, const std::string& sep) {
    std::string out;
    for (const auto& s : v) out += (out.empty() ? "" : sep) + s;
    return out;
}

// ---------------------------------------------------------------- profit

void profit(Problems& p) {
    struct Row {
        const char* fixture;
        const char* revenue;
        const char* delta_liquidity;
        const char* spend;
        const char* p_min;
        const char* p_max;
        const char* printed_min;
        const char* printed_max;
        bool discrepancy;
    };
    const Row rows[] = {
        {"token1", "10.57", "5.39", "15.96", "0.00", "15.96", "0", "15.96", false},
        {"token2", "4.91", "0.14", "2.91", "2.14", "5.05", "2.14", "5.05", false},
        {"token3", "0.21", "2.517", "2.35", "0.38", "2.73", "0.38", "2.73", false},
        {"token4", "15.59", "0.26", "15.79", "0.06", "15.85", "0.1", "15.85", true},
        {"token5", "7.11", "0.26", "8.13", "-0.76", "7.37", "1.28", "7.37", true},
    };
    for (const auto& r : rows) {
        const std::string tag = r.fixture;
        // Formula on the published inputs.
        const Rational R = exporting::parse_rational(r.revenue);
        const Rational dL = exporting::parse_rational(r.delta_liquidity);
        const Rational S = exporting::parse_rational(r.spend);
        const std::string fmax = exporting::format_rational(R + dL, 2);
        const std::string fmin = exporting::format_rational(R + dL - S, 2);
        p.expect(fmin == r.p_min && fmax == r.p_max,
                 tag + ": formula gives (" + fmin + ", " + fmax + "), want (" + r.p_min + ", " + r.p_max + ")");

        // The same figures from the chain data.
        const auto store = chaindata::load_fixture(fixture_dir(r.fixture));
        pipeline::Config config;
        config.published = frauddetect::PublishedFigures{std::string(r.printed_min), std::string(r.printed_max)};
        const auto a = pipeline::analyze(store, addr(expected(r.fixture)["token"]), config);
        const auto& est = a.profit;
        p.expect(est.p_max == est.revenue + est.delta_liquidity, tag + ": p_max != R + dL");
        p.expect(est.p_min == est.p_max - est.spend, tag + ": p_min != p_max - S");
        const std::string pmin = format_eth(est.p_min, 2);
        const std::string pmax = format_eth(est.p_max, 2);
        p.expect(pmin == r.p_min && pmax == r.p_max,
                 tag + ": pipeline gives (" + pmin + ", " + pmax + "), want (" + r.p_min + ", " + r.p_max + ")");
        p.expect(format_eth(est.revenue, 2) == exporting::format_rational(R, 2) &&
                     format_eth(est.spend, 2) == exporting::format_rational(S, 2),
                 tag + ": chain R or S differs from the published inputs");

        bool flagged = false;
        for (const auto& d : a.discrepancies)
            if (d.field == "p_min" && d.computed == r.p_min && d.published == r.printed_min) flagged = true;
        if (r.discrepancy) {
            p.expect(flagged && a.discrepancies.size() == 1, tag + ": p_min discrepancy against " +
                                                                 std::string(r.printed_min) + " not flagged");
            if (flagged) p.note(tag + " p_min " + r.p_min + " vs printed " + r.printed_min);
        } else {
            p.expect(a.discrepancies.empty(), tag + ": unexpected discrepancy");
        }
    }
}

// ------------------------------------------------------------------ fig2

/// Victims by replaying raw token Transfer logs: positive final balances that
/// are not contracts, the deployer, liquidity removers, or sellers.
std::set<Address> victim_oracle(const RawBundle& raw, const Address& token) {
    std::map<TxHash, const chaindata::Transaction*> txs;
    for (const auto& t : raw.transactions) txs[t.hash] = &t;
    const auto pos = [&](const LogEvent& l) {
        const auto* t = txs.at(l.tx_hash);
        return std::tuple(t->block_number, t->tx_index, l.log_index);
    };
    std::vector<const LogEvent*> logs;
    for (const auto& l : raw.logs) logs.push_back(&l);
    std::sort(logs.begin(), logs.end(), [&](const LogEvent* a, const LogEvent* b) { return pos(*a) < pos(*b); });

    std::set<Address> contracts;
    std::set<Address> pairs;
    std::set<Address> excluded;
    std::map<TxHash, std::set<Address>> swap_pairs_in_tx;
    for (const LogEvent* l : logs) {
        contracts.insert(l->emitter);
        const auto ev = chaindata::decode_pair_event(*l);
        if (!ev) continue;
        if (const auto* c = ev->as<chaindata::PairCreated>()) {
            (void)c;
            const Address pair = Address::from_span(ByteView(l->data).subspan(12, 20));
            pairs.insert(pair);
            contracts.insert(pair);
        }
        if (const auto* m = ev->as<chaindata::PairMint>()) contracts.insert(m->sender);
        if (const auto* s = ev->as<chaindata::PairSwap>()) {
            contracts.insert(s->sender);
            swap_pairs_in_tx[l->tx_hash].insert(l->emitter);
        }
        if (const auto* b = ev->as<chaindata::PairBurn>()) {
            contracts.insert(b->sender);
            excluded.insert(b->to);
            excluded.insert(txs.at(l->tx_hash)->from);
        }
    }

    std::map<Address, Amount> balance;
    bool first = true;
    for (const LogEvent* l : logs) {
        if (l->emitter != token) continue;
        const auto t = chaindata::decode_erc20_transfer(*l, 18);
        if (!t) continue;
        if (first) excluded.insert(txs.at(l->tx_hash)->from);  // deployer
        first = false;
        balance[t->from] -= t->amount;
        balance[t->to] += t->amount;
        const auto sw = swap_pairs_in_tx.find(l->tx_hash);
        if (sw != swap_pairs_in_tx.end() && sw->second.count(t->to) && !contracts.count(t->from))
            excluded.insert(t->from);
    }
    std::set<Address> out;
    for (const auto& [a, b] : balance)
        if (b > 0 && !a.is_zero() && !contracts.count(a) && !excluded.count(a)) out.insert(a);
    return out;
}

std::string describe(const std::set<Address>& s) {
    std::vector<std::string> v;
    for (const auto& a : s) v.push_back(a.hex().substr(0, 10));
    return "{" + join(v, ",") + "}";
}

RawBundle perturb(const RawBundle& base, const Address& token, const Address& weth, std::mt19937_64& rng) {
    RawBundle out = base;
    const Amount k_token = 1 + rng() % 1000;
    const Amount k_eth = 1 + rng() % 1000;
    std::map<Address, std::pair<Amount, Amount>> sides;  // pair -> (factor0, factor1)
    const auto factor = [&](const Address& a) { return a == token ? k_token : a == weth ? k_eth : Amount(1); };
    for (const auto& l : base.logs)
        if (auto ev = chaindata::decode_pair_event(l))
            if (const auto* c = ev->as<chaindata::PairCreated>()) {
                const Address pair = Address::from_span(ByteView(l.data).subspan(12, 20));
                sides[pair] = {factor(c->token0), factor(c->token1)};
            }
    for (auto& l : out.logs) {
        if (auto t = chaindata::decode_erc20_transfer(l, 18)) {
            t->amount *= factor(l.emitter);
            auto again = chaindata::encode_erc20_transfer(*t);
            again.tx_hash = l.tx_hash;
            again.log_index = l.log_index;
            l = again;
        } else if (auto ev = chaindata::decode_pair_event(l); ev && sides.count(l.emitter)) {
            const auto [f0, f1] = sides.at(l.emitter);
            std::visit(
                [&](auto& k) {
                    using K = std::decay_t<decltype(k)>;
                    if constexpr (std::is_same_v<K, chaindata::PairMint> || std::is_same_v<K, chaindata::PairBurn>) {
                        k.amount0 *= f0;
                        k.amount1 *= f1;
                    } else if constexpr (std::is_same_v<K, chaindata::PairSwap>) {
                        k.amount0_in *= f0;
                        k.amount0_out *= f0;
                        k.amount1_in *= f1;
                        k.amount1_out *= f1;
                    } else if constexpr (std::is_same_v<K, chaindata::PairSync>) {
                        k.reserve0 *= f0;
                        k.reserve1 *= f1;
                    }
                },
                ev->kind);
            l = chaindata::encode_pair_event(*ev);
        }
    }
    // Whole days keep every timestamp's hour of day, shifting all records alike.
    const std::int64_t shift = static_cast<std::int64_t>(rng() % 400) * 86'400;
    for (auto& t : out.transactions) {
        t.value *= k_eth;
        t.timestamp += shift;
    }
    // Record order in the bundle carries no meaning; chain position does.
    std::shuffle(out.transactions.begin(), out.transactions.end(), rng);
    std::shuffle(out.logs.begin(), out.logs.end(), rng);
    std::shuffle(out.tags.begin(), out.tags.end(), rng);
    return out;
}

void fig2(Problems& p) {
    const auto exp = expected("fig2");
    const Address token = addr(exp["token"]);
    const auto raw = chaindata::read_bundle(fixture_dir("fig2"));
    const pipeline::Config config;

    std::set<Address> want;
    for (const auto& v : exp["victims"]) want.insert(addr(v));

    const auto check = [&](const RawBundle& bundle, const std::string& tag) {
        const auto store = chaindata::ChainStore::build(bundle);
        const auto a = pipeline::analyze(store, token, config);
        const std::string verdict(frauddetect::to_string(a.classification.verdict));
        p.expect(verdict == exp["verdict"].get<std::string>(), tag + ": verdict " + verdict);
        p.expect(a.classification.pump_and_dump == exp["pump_and_dump"].get<bool>(), tag + ": pump-and-dump flag");
        const auto oracle = victim_oracle(bundle, token);
        p.expect(a.victims.victims == oracle,
                 tag + ": victims " + describe(a.victims.victims) + " vs oracle " + describe(oracle));
        p.expect(a.victims.victims == want, tag + ": victims differ from the fixture's list");
    };
    check(raw, "original");
    std::mt19937_64 rng(20220301);
    for (int i = 0; i < 200 && p.items.size() < 10; ++i)
        check(perturb(raw, token, config.lifecycle.weth, rng), "perturbation " + std::to_string(i));
    p.note(std::to_string(want.size()) + " victims, 200 perturbations");
}

// --------------------------------------------------------------- decoder

const char* const kFixtures[] = {"token1", "token2", "token3", "token4",   "token5", "fig2",
                                 "fig8",   "fee5",   "stable", "mintonly", "funders"};

void decoder(Problems& p) {
    std::size_t round_trips = 0;
    std::size_t swaps = 0;
    std::vector<LogEvent> corpus;
    for (const char* name : kFixtures) {
        if (!fs::exists(fixture_dir(name))) continue;
        const std::string tag = name;
        const auto raw = chaindata::read_bundle(fixture_dir(name));
        const auto store = chaindata::ChainStore::build(raw);
        corpus.insert(corpus.end(), raw.logs.begin(), raw.logs.end());

        std::map<Address, Amount> minted, burned;
        std::map<Address, std::map<Address, Amount>> balances;
        for (const auto& log : raw.logs) {
            if (auto t = chaindata::decode_erc20_transfer(log, 18)) {
                auto again = chaindata::encode_erc20_transfer(*t);
                again.tx_hash = log.tx_hash;
                again.log_index = log.log_index;
                p.expect(again == log, tag + ": transfer round-trip");
                ++round_trips;
            } else if (auto e = chaindata::decode_pair_event(log)) {
                p.expect(chaindata::encode_pair_event(*e) == log, tag + ": pair event round-trip");
                ++round_trips;
            } else {
                p.fail(tag + ": undecodable log " + log.tx_hash.hex());
            }
        }

        // Supply: minted minus burned equals what non-zero holders own.
        for (const Address& token : store.tokens_with_transfers()) {
            Amount mint = 0, burn = 0;
            std::map<Address, Amount> bal;
            for (const auto& t : store.transfers_of(token)) {
                if (t.is_mint()) mint += t.amount;
                if (t.is_burn()) burn += t.amount;
                bal[t.from] -= t.amount;
                bal[t.to] += t.amount;
            }
            Amount held = 0;
            for (const auto& [a, b] : bal)
                if (!a.is_zero()) {
                    p.expect(b >= 0, tag + ": negative balance for " + a.hex());
                    held += b;
                }
            p.expect(mint - burn == held, tag + ": mint - burn != sum of balances for " + token.hex());
            if (const auto meta = store.token_meta(token); meta && meta->declared)
                p.expect(meta->total_supply == held, tag + ": recorded supply differs for " + token.hex());
        }

        // Pools: per transaction, the last Sync equals the previous one plus
        // the Mint/Burn/Swap amounts, and k never shrinks across a swap.
        for (const Address& pair : store.pairs_with_events()) {
            const auto& events = store.pair_events_of(pair);
            std::optional<std::pair<Amount, Amount>> reserves;
            for (std::size_t i = 0; i < events.size();) {
                std::size_t j = i;
                Amount d0 = 0, d1 = 0;
                bool swapped = false, moved = false;
                std::optional<std::pair<Amount, Amount>> sync;
                for (; j < events.size() && events[j].tx_hash == events[i].tx_hash; ++j) {
                    const auto& ev = events[j];
                    if (const auto* m = ev.as<chaindata::PairMint>()) {
                        d0 += m->amount0;
                        d1 += m->amount1;
                        moved = true;
                    } else if (const auto* b = ev.as<chaindata::PairBurn>()) {
                        d0 -= b->amount0;
                        d1 -= b->amount1;
                        moved = true;
                    } else if (const auto* s = ev.as<chaindata::PairSwap>()) {
                        d0 += s->amount0_in - s->amount0_out;
                        d1 += s->amount1_in - s->amount1_out;
                        swapped = moved = true;
                        ++swaps;
                    } else if (const auto* y = ev.as<chaindata::PairSync>()) {
                        sync = std::pair{y->reserve0, y->reserve1};
                    }
                }
                const std::string where = tag + " " + events[i].tx_hash.hex().substr(0, 12);
                if (sync && moved) {
                    const auto before = reserves.value_or(std::pair<Amount, Amount>{0, 0});
                    p.expect(sync->first == before.first + d0 && sync->second == before.second + d1,
                             where + ": Sync disagrees with the pool events");
                    if (swapped)
                        p.expect(sync->first * sync->second >= before.first * before.second,
                                 where + ": constant product fell");
                }
                if (sync) reserves = sync;
                i = j;
            }
        }
    }

    // Random and mutated logs: decode, reject with a typed error, or ignore.
    std::mt19937_64 rng(99);
    const Hash32 sigs[] = {chaindata::signatures::transfer(), chaindata::signatures::pair_created(),
                           chaindata::signatures::mint(),     chaindata::signatures::burn(),
                           chaindata::signatures::swap(),     chaindata::signatures::sync()};
    std::size_t crashes = 0, decoded = 0, rejected = 0;
    const int cases = 10'000;
    for (int i = 0; i < cases; ++i) {
        LogEvent l;
        if (i % 2 == 0 && !corpus.empty()) {
            l = corpus[rng() % corpus.size()];
            switch (rng() % 4) {
                case 0:
                    if (!l.data.empty()) l.data.resize(rng() % l.data.size());
                    break;
                case 1:
                    if (!l.topics.empty()) l.topics.erase(l.topics.begin() + rng() % l.topics.size());
                    break;
                case 2:
                    for (int k = 0; k < 3 && !l.data.empty(); ++k) l.data[rng() % l.data.size()] = rng() & 0xff;
                    break;
                default:
                    if (l.topics.size() > 1) {
                        auto raw = l.topics[1 + rng() % (l.topics.size() - 1)].raw();
                        raw[rng() % 12] = static_cast<std::uint8_t>(1 + rng() % 255);
                        l.topics[1] = Hash32(raw);
                    }
            }
        } else {
            const auto n = rng() % 5;
            for (std::size_t k = 0; k < n; ++k) {
                std::array<std::uint8_t, 32> b{};
                for (auto& x : b) x = static_cast<std::uint8_t>(rng() % 3 == 0 ? rng() : 0);
                l.topics.push_back(k == 0 && rng() % 4 ? sigs[rng() % 6] : Hash32(b));
            }
            l.data.resize((rng() % 8) * 32 + (rng() % 3 == 0 ? rng() % 32 : 0));
            for (auto& x : l.data) x = static_cast<std::uint8_t>(rng() % 4 == 0 ? rng() : 0);
        }
        for (int which = 0; which < 2; ++which) {
            try {
                if (which == 0) {
                    if (auto t = chaindata::decode_erc20_transfer(l, 18)) {
                        ++decoded;
                        auto again = chaindata::encode_erc20_transfer(*t);
                        again.tx_hash = l.tx_hash;
                        again.log_index = l.log_index;
                        p.expect(again == l, "fuzz: decoded transfer does not re-encode");
                    }
                } else if (auto e = chaindata::decode_pair_event(l)) {
                    ++decoded;
                    p.expect(chaindata::encode_pair_event(*e) == l, "fuzz: decoded pair event does not re-encode");
                }
            } catch (const MalformedEventError&) {
                ++rejected;
            } catch (...) {
                ++crashes;
            }
        }
    }
    p.expect(crashes == 0, "fuzz: " + std::to_string(crashes) + " untyped failures");
    p.note(std::to_string(round_trips) + " logs round-tripped, " + std::to_string(swaps) + " swaps, " +
           std::to_string(cases) + " fuzz cases (" + std::to_string(decoded) + " decoded, " + std::to_string(rejected) +
           " rejected, " + std::to_string(crashes) + " crashes)");
}

// ----------------------------------------------------------------- trace

bool step_rule(const trace::TraceGraph& g, const trace::Edge& in, const trace::Edge& out, const trace::PeelConfig& c) {
    const std::int64_t delay = out.first_time - in.first_time;
    return g.nodes.at(in.to).tx_count <= c.max_hop_tx_count &&
           Rational(out.total) * boost::multiprecision::denominator(c.forward_share) >=
               Rational(in.total) * boost::multiprecision::numerator(c.forward_share) &&
           0 <= delay && delay <= c.max_hop_delay;
}

/// Every simple path over untagged nodes, filtered by the hop rule and
/// maximality at both ends.
std::set<trace::Path> peel_oracle(const trace::TraceGraph& g, const trace::PeelConfig& c) {
    std::vector<Address> nodes;
    for (const auto& [a, n] : g.nodes)
        if (!n.tag) nodes.push_back(a);
    const auto edge = [&](const Address& a, const Address& b) -> const trace::Edge* {
        const auto it = g.edges.find({a, b});
        if (it == g.edges.end() || g.nodes.at(a).tag || g.nodes.at(b).tag) return nullptr;
        return &it->second;
    };
    std::set<trace::Path> out;
    trace::Path path;
    const std::function<void()> walk = [&]() {
        if (path.size() >= c.min_hops + 1) {
            bool ok = true;
            for (std::size_t i = 0; ok && i + 2 < path.size(); ++i)
                ok = step_rule(g, *edge(path[i], path[i + 1]), *edge(path[i + 1], path[i + 2]), c);
            if (ok) {
                const auto on = [&](const Address& a) { return std::find(path.begin(), path.end(), a) != path.end(); };
                const trace::Edge& last = *edge(path[path.size() - 2], path.back());
                const trace::Edge& first = *edge(path[0], path[1]);
                bool maximal = true;
                for (const Address& x : nodes) {
                    if (on(x)) continue;
                    if (const auto* e = edge(path.back(), x); e && step_rule(g, last, *e, c)) maximal = false;
                    if (const auto* e = edge(x, path.front()); e && step_rule(g, *e, first, c)) maximal = false;
                }
                if (maximal) out.insert(path);
            }
        }
        for (const Address& x : nodes) {
            if (std::find(path.begin(), path.end(), x) != path.end() || !edge(path.back(), x)) continue;
            path.push_back(x);
            walk();
            path.pop_back();
        }
    };
    for (const Address& start : nodes) {
        path = {start};
        walk();
    }
    return out;
}

std::set<Address> burner_oracle(const trace::TraceGraph& g, const trace::BurnerConfig& c) {
    std::set<Address> out;
    for (const auto& [a, n] : g.nodes) {
        std::optional<std::int64_t> last;
        for (const auto& [key, e] : g.edges)
            if (key.first == a || key.second == a) last = std::max(last.value_or(e.last_time), e.last_time);
        if (!last || n.seed || n.tag || n.tx_count > c.max_lifetime_tx) continue;
        const std::int64_t horizon = *last + c.inactivity_horizon;
        if (n.last_seen <= horizon && horizon <= g.observed_until) out.insert(a);
    }
    return out;
}

Address numbered(std::size_t i) {
    std::array<std::uint8_t, 20> raw{};
    raw[18] = static_cast<std::uint8_t>(i >> 8);
    raw[19] = static_cast<std::uint8_t>(i & 0xff);
    raw[0] = 0xab;
    return Address(raw);
}

/// Amounts and times sit on a coarse grid so the share and delay limits are
/// hit exactly.
trace::TraceGraph random_graph(std::mt19937_64& rng) {
    trace::TraceGraph g;
    const std::size_t n = 2 + rng() % 11;
    const double density = 0.1 + (rng() % 30) / 100.0;
    const bool planted = rng() % 2;
    std::uniform_real_distribution<double> u(0, 1);
    const std::int64_t t0 = 1'650'000'000;
    for (std::size_t i = 0; i < n; ++i) {
        trace::NodeInfo info;
        info.address = numbered(i);
        info.tx_count = 1 + rng() % 14;
        if (rng() % 10 == 0) info.tag = chaindata::AddressTag{info.address, chaindata::TagCategory::exchange, "X"};
        info.seed = rng() % 8 == 0;
        info.first_seen = t0 + static_cast<std::int64_t>(rng() % 5) * 86'400;
        info.last_seen = info.first_seen + static_cast<std::int64_t>(rng() % 20) * 86'400;
        g.nodes[info.address] = info;
    }
    const auto add = [&](std::size_t a, std::size_t b, Amount total, std::int64_t t) {
        trace::Edge e;
        e.from = numbered(a);
        e.to = numbered(b);
        e.total = total;
        e.tx_count = 1;
        e.first_time = t;
        e.last_time = t + static_cast<std::int64_t>(rng() % 3 == 0 ? (rng() % 4) * 12 * 3600 : 0);
        g.edges[{e.from, e.to}] = e;
    };
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            if (a != b && u(rng) < density)
                add(a, b, 10 * (4 + rng() % 7), t0 + static_cast<std::int64_t>(rng() % 13) * 6 * 3600);
    if (planted && n >= 4) {
        // A chain that loses a little at each hop, inside the delay limit.
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        Amount amount = 1000;
        std::int64_t t = t0;
        for (std::size_t i = 0; i + 1 < order.size(); ++i) {
            add(order[i], order[i + 1], amount, t);
            amount = amount * (80 + rng() % 25) / 100;
            t += static_cast<std::int64_t>(rng() % 5) * 6 * 3600;
        }
    }
    std::int64_t latest = t0;
    for (const auto& [k, e] : g.edges) latest = std::max(latest, e.last_time);
    g.observed_until = latest + static_cast<std::int64_t>(rng() % 15) * 86'400;
    return g;
}

void trace_criterion(Problems& p) {
    // The Fig. 8 laundering graph stops at every tagged service.
    const auto exp = expected("fig8");
    const auto store = chaindata::load_fixture(fixture_dir("fig8"));
    const pipeline::Config config;
    const auto a = pipeline::analyze(store, addr(exp["token"]), config);
    const auto g = pipeline::run_trace(a, store, config);
    const auto summary = pipeline::summarize(a, g, store, config);

    std::set<Address> terminals;
    std::set<std::string> categories;
    for (const auto& [address, n] : g.nodes) {
        if (!n.terminal) continue;
        terminals.insert(address);
        if (n.tag) categories.insert(std::string(chaindata::to_string(n.tag->category)));
        p.expect(n.tag && chaindata::is_terminal(n.tag->category), "fig8: terminal without a terminal tag");
        p.expect(!n.expanded && g.out_edges(address).empty() && !g.frontier.count(address),
                 "fig8: tracing continued past " + address.hex());
    }
    std::set<Address> want_terminals;
    for (const auto& t : exp["terminals"]) want_terminals.insert(addr(t));
    p.expect(terminals == want_terminals, "fig8: terminals " + describe(terminals));
    for (const char* c : {"mixer", "bridge", "gambling", "exchange"})
        p.expect(categories.count(c) > 0, std::string("fig8: no terminal tagged ") + c);
    std::set<Address> want_burners;
    for (const auto& b : exp["burners"]) want_burners.insert(addr(b));
    p.expect(summary.burners == want_burners, "fig8: burners " + describe(summary.burners));
    p.expect(summary.burners == burner_oracle(g, config.summary.burner), "fig8: burners differ from the rule");
    p.expect(std::set<trace::Path>(summary.peel_chains.begin(), summary.peel_chains.end()) ==
                 peel_oracle(g, config.summary.peel),
             "fig8: peel chains differ from the oracle");
    const auto* busy = g.node(addr(exp["high_activity"]));
    p.expect(busy && busy->high_activity, "fig8: high-activity node not flagged");

    // Random small graphs.
    std::mt19937_64 rng(12);
    const trace::PeelConfig peel;
    const trace::BurnerConfig burner;
    const int graphs = 1000;
    std::size_t with_paths = 0, total_paths = 0, with_burners = 0;
    for (int i = 0; i < graphs; ++i) {
        const auto rg = random_graph(rng);
        const auto got = trace::detect_peel_chain(rg, peel);
        const std::set<trace::Path> got_set(got.begin(), got.end());
        const auto want = peel_oracle(rg, peel);
        if (got_set != want || got_set.size() != got.size()) {
            p.fail("random graph " + std::to_string(i) + ": " + std::to_string(got.size()) + " peel paths vs " +
                   std::to_string(want.size()) + " from the oracle");
        }
        with_paths += !want.empty();
        total_paths += want.size();
        const auto b = trace::detect_burners(rg, burner);
        p.expect(b == burner_oracle(rg, burner), "random graph " + std::to_string(i) + ": burners differ");
        with_burners += !b.empty();
        if (p.items.size() > 10) break;
    }
    p.note(std::to_string(terminals.size()) + " terminals (" + join({categories.begin(), categories.end()}, ",") +
           "), " + std::to_string(graphs) + " random graphs, " + std::to_string(with_paths) + " with peel chains (" +
           std::to_string(total_paths) + " paths), " + std::to_string(with_burners) + " with burners");
}

// ---------------------------------------------------------------- table2

void table2(Problems& p) {
    for (const char* name : {"token1", "token2", "token3", "token4", "token5"}) {
        const std::string tag = name;
        const auto exp = expected(name)["table2"];
        const auto store = chaindata::load_fixture(fixture_dir(name));
        const pipeline::Config config;
        const auto a = pipeline::analyze(store, addr(expected(name)["token"]), config);
        const auto g = pipeline::run_trace(a, store, config);
        const auto s = pipeline::summarize(a, g, store, config);

        p.expect(s.strategies == exp["strategies"].get<std::vector<std::string>>(),
                 tag + ": strategies [" + join(s.strategies, ",") + "]");
        p.expect(s.cash_out.status == exp["cash_out"]["status"].get<std::string>(),
                 tag + ": cash-out status " + s.cash_out.status);
        p.expect(s.cash_out.exchanges == exp["cash_out"]["exchanges"].get<std::vector<std::string>>(),
                 tag + ": exchanges [" + join(s.cash_out.exchanges, ",") + "]");
        p.expect(s.funding.source.value_or("") == exp["funding"]["source"].get<std::string>(),
                 tag + ": funding source " + s.funding.source.value_or("none"));
        std::vector<std::string> via;
        for (const auto& step : s.funding.via) via.push_back(step.kind);
        p.expect(via == exp["funding"]["via"].get<std::vector<std::string>>(), tag + ": via [" + join(via, ",") + "]");
        if (!s.wallet) {
            p.fail(tag + ": no wallet activity");
            continue;
        }
        p.expect(utc_date(s.wallet->first_seen) == exp["wallet_active_from"].get<std::string>() &&
                     utc_date(s.wallet->last_seen) == exp["wallet_active_to"].get<std::string>(),
                 tag + ": wallet active " + utc_date(s.wallet->first_seen) + ".." + utc_date(s.wallet->last_seen));
        p.expect(s.wallet->tx_count == exp["wallet_tx_count"].get<std::size_t>(),
                 tag + ": wallet tx count " + std::to_string(s.wallet->tx_count));
    }
}

// ------------------------------------------------------- reproducibility

int run_cli(const std::vector<std::string>& args) {
    std::string cmd = std::string("\"") + RUGTRACE_CLI_PATH + "\"";
    for (const auto& a : args) cmd += " \"" + a + "\"";
    cmd += " > /dev/null 2>&1";
    return std::system(cmd.c_str());
}

void reproducibility(Problems& p) {
    const fs::path root = fs::temp_directory_path() / "rugtrace-acceptance";
    fs::remove_all(root);
    const char* docs[] = {"timeline.json", "verdict.json", "attribution.json", "trace.json", "report.json"};

    service::Service svc({root / "service", std::nullopt});
    httplib::Server server;
    svc.mount(server);
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread listener([&] { server.listen_after_bind(); });
    server.wait_until_ready();
    httplib::Client client("127.0.0.1", port);
    client.set_read_timeout(120, 0);

    for (const char* name : {"fig8", "token1", "fig2"}) {
        const std::string tag = name;
        const std::string token = expected(name)["token"].get<std::string>();
        for (const char* run : {"a", "b"}) {
            const int rc = run_cli({"report", "--fixtures", fixture_dir(name), "--token", token, "--out",
                                    (root / tag / run).string(), "--format", "json"});
            p.expect(rc == 0, tag + ": CLI run " + run + " exited with " + std::to_string(rc));
        }
        for (const char* doc : docs) {
            const auto x = slurp(root / tag / "a" / doc);
            p.expect(!x.empty() && x == slurp(root / tag / "b" / doc), tag + ": " + doc + " differs between runs");
        }

        const json body = {{"token", token}, {"fixtures", fixture_dir(name)}};
        const auto created = client.Post("/investigations", body.dump(), "application/json");
        if (!created || created->status != 201) {
            p.fail(tag + ": service creation failed");
            continue;
        }
        const std::string base = "/investigations/" + json::parse(created->body)["id"].get<std::string>();
        // Expand in (depth, address) order until nothing expandable is left.
        for (int guard = 0; guard < 10'000; ++guard) {
            const json g = json::parse(client.Get(base + "/graph")->body);
            const unsigned max_depth = g["config"]["maxDepth"].get<unsigned>();
            std::optional<std::pair<unsigned, std::string>> next;
            for (const auto& n : g["nodes"]) {
                if (!n["frontier"].get<bool>() || n["historyMissing"].get<bool>()) continue;
                const unsigned d = n["depth"].get<unsigned>();
                if (d >= max_depth) continue;
                std::pair<unsigned, std::string> k{d, n["address"].get<std::string>()};
                if (!next || k < *next) next = k;
            }
            if (!next) break;
            const auto r = client.Post(base + "/expand", json{{"address", next->second}}.dump(), "application/json");
            if (!r || r->status != 200) {
                p.fail(tag + ": expansion failed");
                break;
            }
        }
        const std::map<std::string, std::string> routes = {{"timeline.json", "/timeline"},
                                                           {"verdict.json", "/verdict"},
                                                           {"attribution.json", "/attribution"},
                                                           {"trace.json", "/graph"},
                                                           {"report.json", "/report?format=json"}};
        for (const auto& [doc, route] : routes) {
            const auto r = client.Get(base + route);
            p.expect(r && r->status == 200 && r->body == slurp(root / tag / "a" / doc),
                     tag + ": service " + route + " differs from the CLI's " + doc);
        }
    }
    server.stop();
    listener.join();
    p.note("CLI twice and service over HTTP on fig8, token1, fig2");
}

struct Criterion {
    const char* name;
    double budget_seconds;  // 0 = no limit
    std::function<void(Problems&)> run;
};

}  // namespace

int main() {
    const Criterion criteria[] = {
        {"profit_bounds", 1.0, profit},
        {"fig2_sell_rug_pull", 10.0, fig2},
        {"decoder_integrity", 0, decoder},
        {"laundering_trace", 60.0, trace_criterion},
        {"table2_summaries", 0, table2},
        {"reproducibility", 0, reproducibility},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Problems p;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            c.run(p);
        } catch (const std::exception& e) {
            p.fail(std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.budget_seconds > 0 && secs > c.budget_seconds)
            p.fail("took longer than " + std::to_string(c.budget_seconds).substr(0, 4) + "s");
        const bool ok = p.items.empty();
        failed += !ok;
        char timing[32];
        std::snprintf(timing, sizeof timing, "%.2fs", secs);
        std::cout << (ok ? "PASS " : "FAIL ") << c.name << " (" << timing << ")";
        if (!p.notes.empty()) std::cout << " " << join(p.notes, "; ");
        std::cout << "\n";
        for (const auto& item : p.items) std::cout << "    " << item << "\n";
    }
    return failed == 0 ? 0 : 1;
}
