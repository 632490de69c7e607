#pragma once

#include <optional>
#include <set>
#include <vector>

#include "rugtrace/frauddetect.hpp"

namespace rugtrace::heuristics {

struct HeuristicsConfig {
    /// Sellers whose sell price is within this relative distance of the
    /// series maximum count as top sellers.
    Rational top_seller_epsilon{1, 20};
    /// Receipts of at least this share of the maximum profit mark a wallet
    /// as a suspected collaborator.
    Rational spike_share{1, 4};
    /// Seconds after the scam window during which receipts still count.
    std::int64_t spike_followup = 0;
    unsigned funder_depth = 2;
    /// Funders with more transactions than this are not followed further.
    std::size_t funder_max_tx_count = 10;
    /// Only funding received within this many seconds before the funded
    /// action counts. Unlimited when empty.
    std::optional<std::int64_t> funder_lookback;
    std::size_t degen_token_count = 20;
};

struct Attribution {
    AttributionMap roles;
    std::optional<Address> deployer;
    std::vector<Warning> warnings;

    std::set<Address> certain() const { return certain_set(roles); }
    std::set<Address> suspected() const;
};

/// Sellers whose execution price came within `epsilon` of the highest price
/// in the series.
std::set<Address> find_top_sellers(const std::vector<lifecycle::PricePoint>& series, const Rational& epsilon);

Attribution attribute_scammer_addresses(const lifecycle::TokenTimeline& timeline, const chaindata::ChainStore& store,
                                        const HeuristicsConfig& config = {},
                                        const frauddetect::FraudConfig& fraud = {});

}  // namespace rugtrace::heuristics
