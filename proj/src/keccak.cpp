#include "rugtrace/keccak.hpp"

#include <array>
#include <cstring>

namespace rugtrace {

namespace {

constexpr std::array<std::uint64_t, 24> kRoundConstants = {
    0x0000000000000001ULL, 0x0000000000008082ULL, 0x800000000000808aULL, 0x8000000080008000ULL,
    0x000000000000808bULL, 0x0000000080000001ULL, 0x8000000080008081ULL, 0x8000000000008009ULL,
    0x000000000000008aULL, 0x0000000000000088ULL, 0x0000000080008009ULL, 0x000000008000000aULL,
    0x000000008000808bULL, 0x800000000000008bULL, 0x8000000000008089ULL, 0x8000000000008003ULL,
    0x8000000000008002ULL, 0x8000000000000080ULL, 0x000000000000800aULL, 0x800000008000000aULL,
    0x8000000080008081ULL, 0x8000000000008080ULL, 0x0000000080000001ULL, 0x8000000080008008ULL,
};

constexpr std::array<int, 24> kRotations = {1, 3, 6, 10, 15, 21, 28, 36, 45, 55, 2, 14,
                                            27, 41, 56, 8, 25, 43, 62, 18, 39, 61, 20, 44};
constexpr std::array<int, 24> kPi = {10, 7, 11, 17, 18, 3, 5, 16, 8, 21, 24, 4,
                                     15, 23, 19, 13, 12, 2, 20, 14, 22, 9, 6, 1};

inline std::uint64_t rotl(std::uint64_t x, int n) { return (x << n) | (x >> (64 - n)); }

void keccak_f1600(std::array<std::uint64_t, 25>& st) {
    for (std::uint64_t rc : kRoundConstants) {
        std::uint64_t c[5];
        for (int i = 0; i < 5; ++i) c[i] = st[i] ^ st[i + 5] ^ st[i + 10] ^ st[i + 15] ^ st[i + 20];
        for (int i = 0; i < 5; ++i) {
            const std::uint64_t d = c[(i + 4) % 5] ^ rotl(c[(i + 1) % 5], 1);
            for (int j = 0; j < 25; j += 5) st[j + i] ^= d;
        }
        std::uint64_t t = st[1];
        for (int i = 0; i < 24; ++i) {
            const int j = kPi[i];
            const std::uint64_t tmp = st[j];
            st[j] = rotl(t, kRotations[i]);
            t = tmp;
        }
        for (int j = 0; j < 25; j += 5) {
            std::uint64_t row[5];
            for (int i = 0; i < 5; ++i) row[i] = st[j + i];
            for (int i = 0; i < 5; ++i) st[j + i] = row[i] ^ ((~row[(i + 1) % 5]) & row[(i + 2) % 5]);
        }
        st[0] ^= rc;
    }
}

std::uint64_t load_le64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

}  // namespace

Hash32 keccak256(ByteView data) {
    constexpr std::size_t rate = 136;
    std::array<std::uint64_t, 25> st{};

    std::size_t offset = 0;
    while (data.size() - offset >= rate) {
        for (std::size_t i = 0; i < rate / 8; ++i) st[i] ^= load_le64(data.data() + offset + 8 * i);
        keccak_f1600(st);
        offset += rate;
    }
    std::array<std::uint8_t, rate> block{};
    const std::size_t rem = data.size() - offset;
    if (rem > 0) std::memcpy(block.data(), data.data() + offset, rem);
    block[rem] ^= 0x01;
    block[rate - 1] ^= 0x80;
    for (std::size_t i = 0; i < rate / 8; ++i) st[i] ^= load_le64(block.data() + 8 * i);
    keccak_f1600(st);

    std::array<std::uint8_t, 32> out{};
    for (std::size_t i = 0; i < 4; ++i)
        for (int b = 0; b < 8; ++b) out[8 * i + b] = static_cast<std::uint8_t>(st[i] >> (8 * b));
    return Hash32(out);
}

Hash32 keccak256(std::string_view text) {
    return keccak256(ByteView(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace rugtrace
