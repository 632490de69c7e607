#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace rugtrace {

/// Arbitrary-precision integer used for every on-chain amount (wei, token
/// base units). Signed so that differences such as delta-liquidity can be
/// represented without a second type; non-negativity is enforced where the
/// domain requires it.
using Amount = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

Amount wei_per_eth();
Amount pow10(unsigned exponent);

/// Parses a non-negative decimal integer string. Throws ParseError.
Amount parse_amount(std::string_view decimal);
std::string to_decimal(const Amount& value);

/// Exact decimal string of `value / 10^decimals`, rounded half away from
/// zero to `places` fractional digits.
std::string format_scaled(const Amount& value, unsigned decimals, unsigned places);
std::string format_eth(const Amount& wei, unsigned places = 2);

/// Scientific rendering with `significant` digits, e.g. "2.39e-05".
std::string format_scientific(const Rational& value, unsigned significant = 3);

std::string to_hex(ByteView bytes, bool prefix = true);
/// Accepts optional 0x prefix; even number of hex digits. Throws ParseError.
Bytes from_hex(std::string_view hex);

template <std::size_t N>
class FixedBytes {
public:
    static constexpr std::size_t size = N;

    constexpr FixedBytes() = default;
    explicit constexpr FixedBytes(const std::array<std::uint8_t, N>& raw) : bytes_(raw) {}

    static FixedBytes from_span(ByteView raw);
    /// Lowercase or mixed-case hex with 0x prefix; exact width required.
    static FixedBytes parse(std::string_view hex);
    static std::optional<FixedBytes> try_parse(std::string_view hex);

    std::string hex() const { return to_hex(bytes_); }
    const std::array<std::uint8_t, N>& raw() const { return bytes_; }
    ByteView view() const { return bytes_; }
    bool is_zero() const;

    auto operator<=>(const FixedBytes&) const = default;

private:
    std::array<std::uint8_t, N> bytes_{};
};

/// 20-byte account identifier. The zero address is a valid, distinguishable
/// value (mint source / burn sink).
using Address = FixedBytes<20>;
using Hash32 = FixedBytes<32>;
using TxHash = Hash32;

/// Chain order of a record: (block, tx index, log index). Transaction-level
/// records use log_index = -1 so they sort before the logs they emit.
struct Position {
    std::uint64_t block = 0;
    std::uint32_t tx_index = 0;
    std::int64_t log_index = -1;

    auto operator<=>(const Position&) const = default;
};

/// Non-fatal finding attached to an analysis result.
struct Warning {
    std::string code;
    std::string message;
    std::optional<TxHash> tx;
};

std::string format_utc(std::int64_t unix_seconds);
/// "YYYY-MM-DD" of a UTC timestamp.
std::string utc_date(std::int64_t unix_seconds);

}  // namespace rugtrace

template <std::size_t N>
struct std::hash<rugtrace::FixedBytes<N>> {
    std::size_t operator()(const rugtrace::FixedBytes<N>& v) const noexcept {
        std::size_t h = 1469598103934665603ULL;
        for (auto b : v.raw()) {
            h ^= b;
            h *= 1099511628211ULL;
        }
        return h;
    }
};
