#pragma once

#include <fstream>
#include <string>

#include "json.hpp"
#include "rugtrace/chaindata.hpp"

namespace testutil {

inline std::string fixture_dir(const std::string& name) { return std::string(RUGTRACE_FIXTURES_DIR) + "/" + name; }

inline rugtrace::chaindata::ChainStore load(const std::string& name) {
    return rugtrace::chaindata::load_fixture(fixture_dir(name));
}

inline nlohmann::json expected(const std::string& name) {
    std::ifstream in(fixture_dir(name) + "/expected.json");
    return nlohmann::json::parse(in);
}

inline rugtrace::Address addr(const nlohmann::json& j) { return rugtrace::Address::parse(j.get<std::string>()); }

}  // namespace testutil
