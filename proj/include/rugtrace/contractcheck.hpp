#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "rugtrace/types.hpp"

namespace rugtrace::contractcheck {

enum class TrapdoorKind {
    owner_mint,
    transfer_blocklist,
    pausable_transfer,
    mutable_fee,
    max_tx_limit,
    honeypot_sell_restriction,
};

std::string_view to_string(TrapdoorKind k);
const std::vector<TrapdoorKind>& all_kinds();

struct SourceSpan {
    std::size_t line_start = 0;  // 1-based, inclusive
    std::size_t line_end = 0;
    std::size_t offset = 0;      // byte offset into the source
    std::size_t length = 0;
};

struct TrapdoorFinding {
    TrapdoorKind kind;
    SourceSpan location;
    std::string excerpt;  // source.substr(location.offset, location.length)
    std::string detail;
};

struct ScanOptions {
    std::set<TrapdoorKind> detectors{all_kinds().begin(), all_kinds().end()};
};

/// Findings are heuristic; an empty list does not mean the contract is safe.
struct ScanResult {
    std::vector<TrapdoorFinding> findings;
    bool verified = false;
    bool lexical_only = false;
    std::vector<Warning> warnings;
};

ScanResult scan_source(std::string_view source, bool verified, const ScanOptions& options = {});

}  // namespace rugtrace::contractcheck
