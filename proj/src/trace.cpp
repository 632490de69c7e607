#include "rugtrace/trace.hpp"

#include <algorithm>
#include <functional>
#include <unordered_set>

namespace rugtrace::trace {

using chaindata::TagCategory;
using chaindata::Transaction;

const NodeInfo* TraceGraph::node(const Address& a) const {
    auto it = nodes.find(a);
    return it == nodes.end() ? nullptr : &it->second;
}

std::vector<const Edge*> TraceGraph::out_edges(const Address& a) const {
    std::vector<const Edge*> out;
    for (auto it = edges.lower_bound({a, Address{}}); it != edges.end() && it->first.first == a; ++it)
        out.push_back(&it->second);
    return out;
}

std::vector<const Edge*> TraceGraph::in_edges(const Address& a) const {
    std::vector<const Edge*> out;
    for (const auto& [key, e] : edges)
        if (key.second == a) out.push_back(&e);
    return out;
}

namespace {

bool terminal_tag(const std::optional<AddressTag>& tag) { return tag && chaindata::is_terminal(tag->category); }

NodeInfo make_node(const Address& a, const ChainStore& store, const TraceConfig& config, const AttributionMap* roles) {
    NodeInfo n;
    n.address = a;
    n.tag = store.tag_of(a);
    n.terminal = terminal_tag(n.tag);
    if (roles) {
        auto it = roles->find(a);
        if (it != roles->end()) n.roles = it->second.roles;
    }
    const auto txs = store.transactions_of(a);
    n.tx_count = txs.size();
    n.high_activity = n.tx_count >= config.high_activity_tx_count;
    Amount balance = 0;
    bool first = true;
    for (const Transaction* tx : txs) {
        if (first) n.first_seen = tx->timestamp;
        first = false;
        n.last_seen = tx->timestamp;
        if (!tx->succeeded() || tx->value == 0) continue;
        if (tx->to && *tx->to == a) balance += tx->value;
        if (tx->from == a) balance -= tx->value;
        n.peak_balance = std::max(n.peak_balance, balance);
    }
    return n;
}

Edge& edge_for(TraceGraph& g, const Address& from, const Address& to) {
    auto [it, inserted] = g.edges.try_emplace({from, to});
    if (inserted) {
        it->second.from = from;
        it->second.to = to;
    }
    return it->second;
}

void add_tx(Edge& e, const Transaction& tx) {
    if (std::find(e.citations.begin(), e.citations.end(), tx.hash) != e.citations.end()) return;
    if (e.tx_count == 0 || tx.position() < e.first) {
        e.first = tx.position();
        e.first_time = tx.timestamp;
    }
    if (e.tx_count == 0 || e.last < tx.position()) {
        e.last = tx.position();
        e.last_time = tx.timestamp;
    }
    e.total += tx.value;
    ++e.tx_count;
    e.citations.push_back(tx.hash);
}

/// Period over which a node's outgoing transfers are followed.
void set_follow_range(TraceGraph& g, NodeInfo& n) {
    std::optional<std::int64_t> from;
    if (n.seed) {
        from = g.config.anchor;
    } else {
        for (const Edge* e : g.in_edges(n.address))
            if (!from || e->first_time < *from) from = e->first_time;
    }
    n.follow_from = from;
    n.follow_until.reset();
    if (n.high_activity && g.config.anchor) {
        if (!n.follow_from || *n.follow_from < *g.config.anchor) n.follow_from = g.config.anchor;
        n.follow_until = *g.config.anchor + g.config.high_activity_window;
    }
}

bool in_range(const NodeInfo& n, std::int64_t t) {
    return (!n.follow_from || t >= *n.follow_from) && (!n.follow_until || t <= *n.follow_until);
}

/// Adds the node's outgoing edges and returns newly discovered addresses.
std::vector<Address> expand_node(TraceGraph& g, const Address& a, const ChainStore& store, const AttributionMap* roles) {
    std::vector<Address> discovered;
    NodeInfo& n = g.nodes.at(a);
    if (n.terminal || n.expanded) return discovered;
    if (!store.has_history(a)) {
        n.history_missing = true;
        g.frontier.insert(a);
        return discovered;
    }
    set_follow_range(g, n);
    n.expanded = true;
    n.history_missing = false;
    g.frontier.erase(a);
    const unsigned depth = n.depth;
    for (const Transaction* tx : store.outgoing_of(a)) {
        if (!tx->succeeded() || !tx->to || tx->value == 0 || *tx->to == a) continue;
        if (!in_range(g.nodes.at(a), tx->timestamp)) continue;
        const Address& to = *tx->to;
        const bool tagged = store.tag_of(to).has_value();
        if (!tagged && store.is_contract(to)) continue;
        if (tx->value < g.config.dust_threshold) continue;
        if (!g.nodes.count(to)) {
            NodeInfo child = make_node(to, store, g.config, roles);
            child.depth = depth + 1;
            g.nodes.emplace(to, std::move(child));
            discovered.push_back(to);
        }
        add_tx(edge_for(g, a, to), *tx);
    }
    return discovered;
}

void refresh_accounting(TraceGraph& g, const ChainStore& store) {
    std::unordered_set<TxHash> traced;
    for (const auto& [key, e] : g.edges)
        for (const auto& h : e.citations) traced.insert(h);
    for (auto& [a, n] : g.nodes) {
        n.inflow = 0;
        n.outflow = 0;
        n.untraced_inflow = 0;
        n.untraced_outflow = 0;
        n.net_change = 0;
    }
    for (const auto& [key, e] : g.edges) {
        g.nodes.at(key.first).outflow += e.total;
        g.nodes.at(key.second).inflow += e.total;
    }
    for (auto& [a, n] : g.nodes) {
        if (!n.expanded) continue;
        for (const Transaction* tx : store.transactions_of(a)) {
            if (!tx->succeeded() || tx->value == 0 || !in_range(n, tx->timestamp)) continue;
            const bool incoming = tx->to && *tx->to == a;
            const bool outgoing = tx->from == a;
            if (incoming == outgoing) continue;
            const bool edge = traced.count(tx->hash) > 0;
            if (incoming) {
                n.net_change += tx->value;
                if (!edge) n.untraced_inflow += tx->value;
            } else {
                n.net_change -= tx->value;
                if (!edge) n.untraced_outflow += tx->value;
            }
        }
    }
}

void add_token_flows(TraceGraph& g, const ChainStore& store) {
    for (auto& [key, e] : g.edges) e.token_flows.clear();
    for (const Address& token : store.tokens_with_transfers()) {
        for (const auto& t : store.transfers_of(token)) {
            auto it = g.edges.find({t.from, t.to});
            if (it == g.edges.end()) continue;
            auto& flows = it->second.token_flows;
            auto f = std::find_if(flows.begin(), flows.end(), [&](const TokenFlow& x) { return x.token == token; });
            if (f == flows.end()) {
                flows.push_back({token, 0, 0});
                f = flows.end() - 1;
            }
            f->amount += t.amount;
            ++f->count;
        }
    }
}

void finish(TraceGraph& g, const ChainStore& store) {
    for (auto it = g.frontier.begin(); it != g.frontier.end();) {
        const NodeInfo& n = g.nodes.at(*it);
        it = n.terminal || n.expanded ? g.frontier.erase(it) : std::next(it);
    }
    refresh_accounting(g, store);
    if (g.config.include_token_flows) add_token_flows(g, store);
    g.observed_until = store.latest_timestamp();
}

}  // namespace

TraceGraph trace_funds(const std::set<Address>& seeds, const ChainStore& store, const TraceConfig& config,
                       const AttributionMap* roles) {
    TraceGraph g;
    g.config = config;
    g.seeds = seeds;
    for (const Address& s : seeds) {
        NodeInfo n = make_node(s, store, config, roles);
        n.seed = true;
        g.nodes.emplace(s, std::move(n));
    }
    std::set<Address> level(seeds.begin(), seeds.end());
    for (unsigned depth = 0; !level.empty(); ++depth) {
        std::set<Address> next;
        for (const Address& a : level) {
            if (depth >= config.max_depth) {
                if (!g.nodes.at(a).terminal) g.frontier.insert(a);
                continue;
            }
            for (const Address& child : expand_node(g, a, store, roles)) next.insert(child);
        }
        level = std::move(next);
    }
    finish(g, store);
    return g;
}

bool expand(TraceGraph& graph, const Address& address, const ChainStore& store, const AttributionMap* roles) {
    auto it = graph.nodes.find(address);
    if (it == graph.nodes.end() || it->second.terminal || it->second.expanded) return false;
    for (const Address& child : expand_node(graph, address, store, roles))
        if (!graph.nodes.at(child).terminal) graph.frontier.insert(child);
    finish(graph, store);
    return graph.nodes.at(address).expanded;
}

std::size_t expand_to_depth(TraceGraph& graph, const ChainStore& store, const AttributionMap* roles) {
    std::size_t count = 0;
    for (;;) {
        const NodeInfo* next = nullptr;
        for (const Address& a : graph.frontier) {
            const NodeInfo& n = graph.nodes.at(a);
            if (n.history_missing || n.depth >= graph.config.max_depth) continue;
            if (!next || n.depth < next->depth) next = &n;
        }
        if (!next) return count;
        const Address a = next->address;
        if (!expand(graph, a, store, roles)) graph.nodes.at(a).history_missing = true;
        ++count;
    }
}

void apply_tag(TraceGraph& graph, const AddressTag& tag) {
    auto it = graph.nodes.find(tag.address);
    if (it == graph.nodes.end()) return;
    it->second.tag = tag;
    it->second.terminal = chaindata::is_terminal(tag.category);
    if (it->second.terminal) graph.frontier.erase(tag.address);
}

std::vector<Path> detect_peel_chain(const TraceGraph& g, const PeelConfig& config) {
    const auto eligible = [&](const Address& a) {
        const NodeInfo* n = g.node(a);
        return n && !n->tag;
    };
    std::map<Address, std::vector<const Edge*>> out;
    std::map<Address, std::vector<const Edge*>> in;
    for (const auto& [key, e] : g.edges) {
        if (!eligible(key.first) || !eligible(key.second)) continue;
        out[key.first].push_back(&e);
        in[key.second].push_back(&e);
    }
    const auto step_ok = [&](const Edge& a, const Edge& b) {
        const NodeInfo* mid = g.node(a.to);
        if (mid->tx_count > config.max_hop_tx_count) return false;
        if (Rational(b.total) < config.forward_share * Rational(a.total)) return false;
        const std::int64_t delay = b.first_time - a.first_time;
        return delay >= 0 && delay <= config.max_hop_delay;
    };

    std::vector<Path> paths;
    std::vector<const Edge*> stack;
    Path path;
    std::set<Address> on_path;
    const std::function<void()> dfs = [&]() {
        if (paths.size() >= config.max_paths) return;
        const Edge& last = *stack.back();
        bool extended = false;
        for (const Edge* next : out[last.to]) {
            if (on_path.count(next->to) || !step_ok(last, *next)) continue;
            extended = true;
            stack.push_back(next);
            path.push_back(next->to);
            on_path.insert(next->to);
            dfs();
            on_path.erase(next->to);
            path.pop_back();
            stack.pop_back();
        }
        if (extended || stack.size() < config.min_hops) return;
        const Edge& first = *stack.front();
        for (const Edge* prev : in[first.from])
            if (!on_path.count(prev->from) && step_ok(*prev, first)) return;
        paths.push_back(path);
    };
    for (const auto& [from, edges] : out) {
        for (const Edge* e : edges) {
            if (e->from == e->to) continue;
            stack = {e};
            path = {e->from, e->to};
            on_path = {e->from, e->to};
            dfs();
        }
    }
    std::sort(paths.begin(), paths.end());
    paths.erase(std::unique(paths.begin(), paths.end()), paths.end());
    return paths;
}

std::set<Address> detect_burners(const TraceGraph& g, const BurnerConfig& config) {
    std::set<Address> out;
    std::map<Address, std::int64_t> last_relevant;
    for (const auto& [key, e] : g.edges) {
        for (const Address& a : {key.first, key.second}) {
            auto [it, inserted] = last_relevant.try_emplace(a, e.last_time);
            if (!inserted) it->second = std::max(it->second, e.last_time);
        }
    }
    for (const auto& [a, last] : last_relevant) {
        const NodeInfo& n = g.nodes.at(a);
        if (n.seed || n.tag || n.tx_count > config.max_lifetime_tx) continue;
        const std::int64_t horizon = last + config.inactivity_horizon;
        if (n.last_seen > horizon || g.observed_until < horizon) continue;
        out.insert(a);
    }
    return out;
}

std::string_view LaunderingFinding::name() const {
    static constexpr std::string_view names[] = {"peel_chain", "chain_hop", "mixer_deposit", "cex_deposit",
                                                 "burner",     "gambling",  "none"};
    return names[kind.index()];
}

namespace {


std::vector<TxHash> first_citations(const std::vector<const Edge*>& edges) {
    std::vector<TxHash> out;
    for (const Edge* e : edges)
        if (!e->citations.empty()) out.push_back(e->citations.front());
    return out;
}

FundingTrail funding_trail(const ChainStore& store, const Address& wallet, const SummaryConfig& config) {
    FundingTrail trail;
    Address cur = wallet;
    std::optional<Position> before;
    for (const Transaction* tx : store.outgoing_of(cur)) {
        before = tx->position();
        break;
    }
    std::set<Address> seen{wallet};
    for (unsigned depth = 0; depth < config.funding_max_depth; ++depth) {
        const Transaction* best = nullptr;
        for (const Transaction* tx : store.incoming_of(cur)) {
            if (!tx->succeeded() || tx->value == 0 || tx->from == cur) continue;
            if (before && !(tx->position() < *before)) continue;
            if (!best || tx->value > best->value || (tx->value == best->value && best->position() < tx->position()))
                best = tx;
        }
        if (!best) break;
        trail.citations.push_back(best->hash);
        const Address& sender = best->from;
        if (auto tag = store.tag_of(sender)) {
            trail.source = tag->label;
            trail.source_address = sender;
            break;
        }
        if (store.is_contract(sender) || !seen.insert(sender).second) break;
        trail.via.push_back({sender, store.tx_count(sender) <= 10 ? "burner" : "active_wallet", best->hash});
        cur = sender;
        before = best->position();
    }
    if (!trail.source && !trail.via.empty()) trail.source_address = trail.via.back().address;
    return trail;
}

}  // namespace

LaunderingSummary summarize_laundering(const TraceGraph& g, const ChainStore& store,
                                       const std::optional<Address>& wallet, const SummaryConfig& config) {
    LaunderingSummary s;
    s.peel_chains = detect_peel_chain(g, config.peel);
    s.burners = detect_burners(g, config.burner);
    std::set<std::string> strategies;

    for (const Path& p : s.peel_chains) {
        std::vector<TxHash> cites;
        for (std::size_t i = 0; i + 1 < p.size(); ++i) cites.push_back(g.edges.at({p[i], p[i + 1]}).citations.front());
        s.findings.push_back({PeelChainFinding{p}, cites});
        strategies.insert("peel_chains");
    }

    // Nodes reachable from the seeds without passing through a busy wallet
    // that is not itself attributed.
    std::set<Address> clean(g.seeds.begin(), g.seeds.end());
    std::vector<Address> work(g.seeds.begin(), g.seeds.end());
    while (!work.empty()) {
        const Address a = work.back();
        work.pop_back();
        const NodeInfo& n = g.nodes.at(a);
        if (n.high_activity && !n.seed) continue;
        for (const Edge* e : g.out_edges(a))
            if (clean.insert(e->to).second) work.push_back(e->to);
    }

    std::map<std::string, int> exchange_rank;  // 3 identified, 2 co-mingled, 1 unknown
    for (const auto& [a, n] : g.nodes) {
        if (!n.terminal || !n.tag) continue;
        const auto in = g.in_edges(a);
        if (in.empty()) continue;
        Amount amount = 0;
        for (const Edge* e : in) amount += e->total;
        const auto cites = first_citations(in);
        switch (n.tag->category) {
            case TagCategory::bridge:
                s.findings.push_back({ChainHopFinding{a, n.tag->label, amount}, cites});
                strategies.insert("chain_hopping");
                break;
            case TagCategory::mixer:
                s.findings.push_back({MixerFinding{a, n.tag->label, amount}, cites});
                strategies.insert("mixer");
                break;
            case TagCategory::gambling:
                s.findings.push_back({GamblingFinding{a, n.tag->label, amount}, cites});
                strategies.insert("gambling");
                break;
            case TagCategory::exchange: {
                int rank = 1;
                for (const Edge* e : in) {
                    const NodeInfo& src = g.nodes.at(e->from);
                    int r;
                    if (src.high_activity) r = src.seed ? 2 : 1;
                    else r = clean.count(e->from) ? 3 : 1;
                    rank = std::max(rank, r);
                }
                static constexpr const char* names[] = {"", "unknown", "co-mingled", "identified"};
                s.findings.push_back({CexDepositFinding{a, n.tag->label, amount, amount >= config.kyc_threshold,
                                                        names[rank]},
                                      cites});
                auto [it, inserted] = exchange_rank.try_emplace(n.tag->label, rank);
                if (!inserted) it->second = std::max(it->second, rank);
                break;
            }
            default:
                break;
        }
    }
    for (const Address& b : s.burners) {
        std::vector<const Edge*> touching = g.in_edges(b);
        for (const Edge* e : g.out_edges(b)) touching.push_back(e);
        s.findings.push_back({BurnerFinding{b}, first_citations(touching)});
        strategies.insert("burner_addresses");
    }
    if (s.findings.empty()) s.findings.push_back({NoFinding{}, {}});
    s.strategies.assign(strategies.begin(), strategies.end());

    int best = 0;
    for (const auto& [label, rank] : exchange_rank) best = std::max(best, rank);
    if (best > 0) {
        static constexpr const char* names[] = {"none", "unknown", "co-mingled", "identified"};
        s.cash_out.status = names[best];
        for (const auto& [label, rank] : exchange_rank)
            (rank == best ? s.cash_out.exchanges : s.cash_out.candidates).push_back(label);
    }

    if (wallet) {
        s.funding = funding_trail(store, *wallet, config);
        const auto txs = store.transactions_of(*wallet);
        if (!txs.empty()) s.wallet = WalletActivity{*wallet, txs.front()->timestamp, txs.back()->timestamp, txs.size()};
    }
    return s;
}

}  // namespace rugtrace::trace
