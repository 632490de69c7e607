#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rugtrace/lifecycle.hpp"
#include "rugtrace/roles.hpp"

namespace rugtrace::frauddetect {

using lifecycle::PricePoint;
using lifecycle::ScamWindow;
using lifecycle::TokenTimeline;

enum class Verdict { simple_rug_pull, sell_rug_pull, none };
enum class Confidence { low, medium, high };

std::string_view to_string(Verdict v);
std::string_view to_string(Confidence c);

struct Evidence {
    std::string claim;
    std::vector<TxHash> txs;
};

struct PumpConfig {
    Rational rise{5};           // peak / first trade
    Rational collapse{9, 10};   // (peak - last) / peak
};

struct PumpFinding {
    PricePoint first;
    PricePoint peak;
    PricePoint last;
    Rational rise_factor;
    Rational collapse_factor;
    std::vector<PricePoint> secondary_peaks;
};

struct FraudConfig {
    Rational drain_share{9, 10};
    /// Scammer sells totalling at least this share of the peak ETH reserve
    /// form a sell cluster.
    Rational sell_cluster_share{1, 4};
    PumpConfig pump;
    Rational advance_fee_share{4, 5};
    /// Count every trader's swaps in R and S, not only attributed addresses.
    bool rsl_all_addresses = false;
};

struct ScamClassification {
    Verdict verdict = Verdict::none;
    bool pump_and_dump = false;
    std::optional<PumpFinding> pump;
    Confidence confidence = Confidence::low;
    std::vector<Evidence> evidence;
    std::vector<std::string> notes;
};

struct RslResult {
    Amount revenue = 0;
    Amount spend = 0;
    Amount delta_liquidity = 0;
    Amount liquidity_provided = 0;
    Amount liquidity_removed = 0;
    /// The scam ended with a drain swap instead of a liquidity removal; that
    /// swap's ETH is booked as removed liquidity rather than revenue.
    std::optional<TxHash> drain_exit_tx;
    std::vector<TxHash> revenue_txs;
    std::vector<TxHash> spend_txs;
    std::vector<TxHash> liquidity_txs;
    std::vector<Warning> warnings;
};

struct ProfitEstimate {
    Amount revenue = 0;
    Amount spend = 0;
    Amount delta_liquidity = 0;
    Amount p_min = 0;
    Amount p_max = 0;
    std::optional<std::string> usd_date;
    std::optional<Rational> usd_rate;
    std::optional<std::string> usd_rate_literal;

    /// USD value of a wei amount at the recorded rate.
    std::optional<Rational> usd(const Amount& wei) const;
};

/// Figures as printed in a published table, as decimal strings in ETH.
struct PublishedFigures {
    std::optional<std::string> p_min;
    std::optional<std::string> p_max;
};

struct Discrepancy {
    std::string field;
    std::string computed;   // rounded to 2 decimals
    std::string published;
};

enum class ExclusionReason {
    zero_address,
    contract,
    liquidity_remover,
    scammer_attributed,
    sold_before_window_end,
    sold_after_window_end,
};

std::string_view to_string(ExclusionReason r);

struct VictimSet {
    std::set<Address> victims;
    std::map<Address, ExclusionReason> excluded;
};

struct AdvanceFeeFinding {
    bool transfer_fee = false;
    bool auto_liquidity = false;
    std::size_t sells_examined = 0;
    std::size_t sells_short = 0;
    std::size_t sells_with_liquidity = 0;
    Rational median_fee_share{0};
    std::vector<TxHash> citations;
};

std::optional<PumpFinding> detect_pump_and_dump(const std::vector<PricePoint>& series, const PumpConfig& config,
                                                const ScamWindow* window = nullptr);

RslResult compute_rsl(const TokenTimeline& timeline, const AttributionMap& attribution, const ScamWindow* window,
                      const FraudConfig& config = {});

ProfitEstimate profit_bounds(const Amount& revenue, const Amount& spend, const Amount& delta_liquidity);
ProfitEstimate profit_bounds(const Amount& revenue, const Amount& spend, const Amount& delta_liquidity,
                             const chaindata::RateTable& rates, const std::string& date);

std::vector<Discrepancy> compare_with_published(const ProfitEstimate& estimate, const PublishedFigures& published);

VictimSet identify_victims(const TokenTimeline& timeline, const AttributionMap& attribution, const ScamWindow& window);

ScamClassification classify_rug_pull(const TokenTimeline& timeline, const AttributionMap& attribution,
                                     const FraudConfig& config = {});

std::optional<AdvanceFeeFinding> detect_advance_fee(const TokenTimeline& timeline, const FraudConfig& config = {});

}  // namespace rugtrace::frauddetect
