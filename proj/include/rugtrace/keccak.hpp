#pragma once

#include <string_view>

#include "rugtrace/types.hpp"

namespace rugtrace {

/// Keccak-256 as used by Ethereum (original Keccak padding, not SHA3-256).
Hash32 keccak256(ByteView data);
Hash32 keccak256(std::string_view text);

}  // namespace rugtrace
