#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fixture_util.hpp"
#include "rugtrace/contractcheck.hpp"

using namespace rugtrace::contractcheck;

namespace {

std::string source(const std::string& name) {
    std::ifstream in(testutil::fixture_dir("sources/" + name));
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::multiset<std::string> kinds(const ScanResult& r) {
    std::multiset<std::string> out;
    for (const auto& f : r.findings) out.insert(std::string(to_string(f.kind)));
    return out;
}

void check_excerpts(const std::string& src, const ScanResult& r) {
    for (const auto& f : r.findings) {
        CHECK(src.substr(f.location.offset, f.location.length) == f.excerpt);
        CHECK(f.location.line_start >= 1);
        CHECK(f.location.line_end >= f.location.line_start);
        std::size_t line = 1;
        for (std::size_t i = 0; i < f.location.offset; ++i) line += src[i] == '\n';
        CHECK(line == f.location.line_start);
    }
}

}  // namespace

TEST_CASE("standard token shape has no findings") {
    const auto src = source("minimal_erc20.sol");
    const auto r = scan_source(src, true);
    CHECK(r.findings.empty());
    CHECK_FALSE(r.lexical_only);
}

TEST_CASE("owner-only mint is reported") {
    const auto src = source("owner_mint.sol");
    const auto r = scan_source(src, true);
    CHECK(kinds(r) == std::multiset<std::string>{"owner_mint"});
    check_excerpts(src, r);
    CHECK(r.findings[0].excerpt.find("function mint") == 0);
}

TEST_CASE("tax token trapdoors") {
    const auto src = source("fee_token.sol");
    const auto r = scan_source(src, true);
    const auto k = kinds(r);
    CHECK(k.count("mutable_fee") == 1);
    CHECK(k.count("transfer_blocklist") == 1);
    CHECK(k.count("pausable_transfer") == 1);
    CHECK(k.count("max_tx_limit") == 1);
    CHECK(k.count("owner_mint") == 0);
    CHECK(k.count("honeypot_sell_restriction") == 0);
    check_excerpts(src, r);
    for (const auto& f : r.findings)
        if (f.kind == TrapdoorKind::mutable_fee) CHECK(f.excerpt == "_taxFee = taxFee;");
}

TEST_CASE("sell restriction into the pair") {
    const auto src = source("honeypot.sol");
    const auto r = scan_source(src, true);
    CHECK(kinds(r) == std::multiset<std::string>{"honeypot_sell_restriction"});
    check_excerpts(src, r);
}

TEST_CASE("pausable transfer hook") {
    const auto src = source("pausable.sol");
    const auto r = scan_source(src, true);
    CHECK(kinds(r) == std::multiset<std::string>{"pausable_transfer"});
    check_excerpts(src, r);
}

TEST_CASE("unparseable source falls back to a lexical scan") {
    const auto src = source("broken.sol");
    const auto r = scan_source(src, false);
    CHECK(r.lexical_only);
    CHECK_FALSE(r.verified);
    CHECK(kinds(r) == std::multiset<std::string>{"mutable_fee", "owner_mint"});
    check_excerpts(src, r);
    CHECK(r.warnings.size() == 2);
}

TEST_CASE("detectors can be disabled individually") {
    const auto src = source("fee_token.sol");
    ScanOptions opts;
    opts.detectors.erase(TrapdoorKind::mutable_fee);
    const auto k = kinds(scan_source(src, true, opts));
    CHECK(k.count("mutable_fee") == 0);
    CHECK(k.count("max_tx_limit") == 1);
}

TEST_CASE("adding unrelated code keeps every finding") {
    for (const std::string name : {"fee_token.sol", "honeypot.sol", "owner_mint.sol", "pausable.sol"}) {
        CAPTURE(name);
        const auto src = source(name);
        const auto before = kinds(scan_source(src, true));
        const std::string extra =
            "\ncontract Unrelated {\n    uint256 public counter;\n    function bump() external { counter += 1; }\n}\n";
        const std::string padded = "// header\n" + src + extra;
        const auto after = scan_source(padded, true);
        for (const auto& k : before) CHECK(kinds(after).count(k) >= 1);
        check_excerpts(padded, after);
    }
}

TEST_CASE("empty and garbage input never throw") {
    CHECK(scan_source("", true).findings.empty());
    CHECK_NOTHROW(scan_source("}}}{{{ ((( contract", true));
    CHECK_NOTHROW(scan_source("contract A { function f( { }", true));
    std::string noise;
    for (int i = 0; i < 2000; ++i) noise += static_cast<char>(32 + (i * 7919) % 95);
    CHECK_NOTHROW(scan_source(noise, true));
}
