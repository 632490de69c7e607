#include "rugtrace/types.hpp"

#include <algorithm>
#include <cstdio>
#include <ctime>

#include "rugtrace/errors.hpp"

namespace rugtrace {

namespace {

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

}  // namespace

Amount pow10(unsigned exponent) {
    Amount r = 1;
    for (unsigned i = 0; i < exponent; ++i) r *= 10;
    return r;
}

Amount wei_per_eth() {
    static const Amount v = pow10(18);
    return v;
}

Amount parse_amount(std::string_view decimal) {
    if (decimal.empty()) throw ParseError("empty amount");
    if (decimal.size() > 100) throw ParseError("amount too long");
    Amount v = 0;
    for (char c : decimal) {
        if (c < '0' || c > '9') throw ParseError("invalid decimal amount '" + std::string(decimal) + "'");
        v = v * 10 + (c - '0');
    }
    return v;
}

std::string to_decimal(const Amount& value) { return value.str(); }

std::string format_scaled(const Amount& value, unsigned decimals, unsigned places) {
    const bool negative = value < 0;
    Amount mag = negative ? Amount(-value) : value;
    Amount scaled;
    if (places >= decimals) {
        scaled = mag * pow10(places - decimals);
    } else {
        const Amount div = pow10(decimals - places);
        scaled = mag / div;
        if ((mag % div) * 2 >= div) scaled += 1;
    }
    std::string digits = scaled.str();
    if (digits.size() <= places) digits.insert(0, places + 1 - digits.size(), '0');
    std::string out;
    if (negative && scaled != 0) out.push_back('-');
    out += digits.substr(0, digits.size() - places);
    if (places > 0) {
        out.push_back('.');
        out += digits.substr(digits.size() - places);
    }
    return out;
}

std::string format_eth(const Amount& wei, unsigned places) { return format_scaled(wei, 18, places); }

std::string format_scientific(const Rational& value, unsigned significant) {
    if (value == 0) return "0";
    if (significant == 0) significant = 1;
    const bool negative = value < 0;
    Rational mag = negative ? Rational(-value) : value;

    int exponent = 0;
    while (mag >= Rational(pow10(exponent + 1))) ++exponent;
    while (exponent <= 0 && mag < Rational(Amount(1), pow10(static_cast<unsigned>(-exponent)))) --exponent;
    // 10^exponent <= mag < 10^(exponent+1)
    auto scale = [](const Rational& r, int e) {
        return e >= 0 ? Rational(r * Rational(pow10(e))) : Rational(r / Rational(pow10(-e)));
    };
    const int shift = static_cast<int>(significant) - 1 - exponent;
    Rational shifted = scale(mag, shift);
    Amount mantissa = boost::multiprecision::numerator(shifted) / boost::multiprecision::denominator(shifted);
    const Rational frac = shifted - Rational(mantissa);
    if (frac * 2 >= 1) mantissa += 1;
    if (mantissa >= pow10(significant)) {
        mantissa /= 10;
        ++exponent;
    }
    std::string digits = mantissa.str();
    std::string out = negative ? "-" : "";
    out += digits.substr(0, 1);
    if (digits.size() > 1) out += "." + digits.substr(1);
    char buf[16];
    std::snprintf(buf, sizeof buf, "e%c%02d", exponent < 0 ? '-' : '+', std::abs(exponent));
    out += buf;
    return out;
}

std::string to_hex(ByteView bytes, bool prefix) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2 + 2);
    if (prefix) out = "0x";
    for (auto b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0f]);
    }
    return out;
}

Bytes from_hex(std::string_view hex) {
    if (hex.size() >= 2 && hex[0] == '0' && (hex[1] == 'x' || hex[1] == 'X')) hex.remove_prefix(2);
    if (hex.size() % 2 != 0) throw ParseError("odd-length hex string");
    Bytes out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const int hi = hex_value(hex[2 * i]);
        const int lo = hex_value(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) throw ParseError("invalid hex digit");
        out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return out;
}

template <std::size_t N>
FixedBytes<N> FixedBytes<N>::from_span(ByteView raw) {
    if (raw.size() != N) throw ParseError("expected " + std::to_string(N) + " bytes, got " + std::to_string(raw.size()));
    std::array<std::uint8_t, N> a{};
    std::copy(raw.begin(), raw.end(), a.begin());
    return FixedBytes(a);
}

template <std::size_t N>
FixedBytes<N> FixedBytes<N>::parse(std::string_view hex) {
    if (hex.size() != 2 + 2 * N || hex[0] != '0' || (hex[1] != 'x' && hex[1] != 'X'))
        throw ParseError("expected 0x-prefixed " + std::to_string(N) + "-byte hex value, got '" + std::string(hex) + "'");
    return from_span(from_hex(hex));
}

template <std::size_t N>
std::optional<FixedBytes<N>> FixedBytes<N>::try_parse(std::string_view hex) {
    try {
        return parse(hex);
    } catch (const ParseError&) {
        return std::nullopt;
    }
}

template <std::size_t N>
bool FixedBytes<N>::is_zero() const {
    return std::all_of(bytes_.begin(), bytes_.end(), [](std::uint8_t b) { return b == 0; });
}

template class FixedBytes<20>;
template class FixedBytes<32>;
template class FixedBytes<4>;

std::string format_utc(std::int64_t unix_seconds) {
    std::time_t t = static_cast<std::time_t>(unix_seconds);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string utc_date(std::int64_t unix_seconds) { return format_utc(unix_seconds).substr(0, 10); }

}  // namespace rugtrace
