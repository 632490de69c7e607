#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fixture_util.hpp"
#include "rugtrace/cli.hpp"

using namespace rugtrace;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::filesystem::path fresh_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("rugtrace-cli-" + name);
    std::filesystem::remove_all(p);
    return p;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string token(const std::string& fixture) { return testutil::expected(fixture)["token"].get<std::string>(); }

}  // namespace

TEST_CASE("detect writes timeline and verdict") {
    const auto out = fresh_dir("detect");
    const auto r = invoke({"detect", "--fixtures", testutil::fixture_dir("fig2"), token("fig2"), "--out", out.string()});
    CHECK(r.code == 0);
    const auto verdict = nlohmann::json::parse(slurp(out / "verdict.json"));
    CHECK(verdict["classification"]["verdict"] == "sell_rug_pull");
    CHECK(verdict["classification"]["pumpAndDump"] == true);
    CHECK(std::filesystem::exists(out / "timeline.json"));
    CHECK_FALSE(std::filesystem::exists(out / "report.json"));
}

TEST_CASE("report runs its prerequisites") {
    const auto out = fresh_dir("report");
    const auto r = invoke({"report", "--fixtures", testutil::fixture_dir("fig8"), "--token", token("fig8"), "--out",
                        out.string(), "--format", "md"});
    CHECK(r.code == 0);
    for (const char* f : {"timeline.json", "verdict.json", "attribution.json", "trace.json", "report.md"})
        CHECK(std::filesystem::exists(out / f));
}

TEST_CASE("several tokens get one directory each") {
    const auto out = fresh_dir("multi");
    const auto r = invoke({"detect", "--fixtures", testutil::fixture_dir("fig2"), token("fig2"), token("fig2"), "--out",
                        out.string()});
    CHECK(r.code == 0);
    CHECK(std::filesystem::exists(out / token("fig2") / "verdict.json"));
}

TEST_CASE("usage errors exit 2") {
    CHECK(invoke({}).code == 2);
    CHECK(invoke({"frobnicate"}).code == 2);
    CHECK(invoke({"detect", "--fixtures", testutil::fixture_dir("fig2"), token("fig2"), "--bogus"}).code == 2);
    CHECK(invoke({"detect", token("fig2")}).code == 2);
    CHECK(invoke({"detect", "--fixtures", "a", "--live", "http://x", token("fig2")}).code == 2);
    CHECK(invoke({"report", "--fixtures", testutil::fixture_dir("fig2"), token("fig2"), "--format", "pdf"}).code == 2);
}

TEST_CASE("pipeline errors exit 1 with a structured message") {
    const auto bad = fresh_dir("corrupt");
    std::filesystem::copy(testutil::fixture_dir("fig2"), bad);
    {
        std::ofstream f(bad / "transactions.jsonl", std::ios::app);
        f << "{\"hash\": \"0x12\"}\n";
    }
    const auto r = invoke({"ingest", "--fixtures", bad.string(), "--out", fresh_dir("corrupt-out").string()});
    CHECK(r.code == 1);
    const auto err = nlohmann::json::parse(r.err);
    CHECK(err["error"] == "load_error");
    CHECK(err["message"].get<std::string>().find("transactions.jsonl:") != std::string::npos);

    const auto missing = invoke({"detect", "--fixtures", testutil::fixture_dir("fig2"),
                              "0x00000000000000000000000000000000000000aa", "--out", fresh_dir("nf").string()});
    CHECK(missing.code == 1);
    CHECK(nlohmann::json::parse(missing.err)["error"] == "not_found");

    const auto range = invoke({"detect", "--fixtures", testutil::fixture_dir("fig2"), token("fig2"), "--pump-collapse",
                            "1.5", "--out", fresh_dir("range").string()});
    CHECK(range.code == 1);
    CHECK(nlohmann::json::parse(range.err)["error"] == "config_error");
}

TEST_CASE("ingest summarizes a valid bundle") {
    const auto out = fresh_dir("ingest");
    const auto r = invoke({"ingest", "--fixtures", testutil::fixture_dir("fig8"), "--out", out.string()});
    CHECK(r.code == 0);
    const auto j = nlohmann::json::parse(slurp(out / "ingest.json"));
    CHECK(j["tokens"][0] == token("fig8"));
    CHECK(j["decodeIssues"] == 0);
}

TEST_CASE("every subcommand documents its flags and defaults") {
    for (const char* sub : {"ingest", "detect", "attribute", "trace", "report", "serve"}) {
        CAPTURE(sub);
        const auto r = invoke({sub, "--help"});
        CHECK(r.code == 0);
        CHECK(r.out.find("Usage:") != std::string::npos);
    }
    const auto help = invoke({"report", "--help"}).out;
    for (const char* flag : {"--fixtures", "--live", "--token", "--out", "--max-depth", "--dust-wei", "--pump-rise",
                             "--pump-collapse", "--kyc-eth", "--format", "--anonymize"})
        CHECK(help.find(flag) != std::string::npos);
    CHECK(help.find("default: 6") != std::string::npos);
    CHECK(invoke({"serve", "--help"}).out.find("127.0.0.1:8547") != std::string::npos);
}
