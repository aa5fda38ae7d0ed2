#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace hematch::he {

using u128 = unsigned __int128;

// Prime modulus with a precomputed 2^128 Barrett ratio.  Valid for q < 2^62;
// the chain generator only emits primes of 20..60 bits.
struct Modulus {
    uint64_t value = 0;
    uint64_t ratio_hi = 0; // floor(2^128 / value), high word
    uint64_t ratio_lo = 0; //                       low word

    Modulus() = default;
    explicit Modulus(uint64_t q);

    // Reduces a full 128-bit product.  One conditional correction pass.
    uint64_t reduce(u128 z) const {
        uint64_t zlo = uint64_t(z);
        uint64_t zhi = uint64_t(z >> 64);
        u128 mid = u128(zhi) * ratio_lo + u128(zlo) * ratio_hi + ((u128(zlo) * ratio_lo) >> 64);
        uint64_t qhat = zhi * ratio_hi + uint64_t(mid >> 64);
        uint64_t r = zlo - qhat * value;
        while (r >= value) r -= value;
        return r;
    }

    uint64_t mul(uint64_t a, uint64_t b) const { return reduce(u128(a) * b); }

    uint64_t reduce64(uint64_t v) const { return reduce(u128(v)); }
};

inline uint64_t add_mod(uint64_t a, uint64_t b, uint64_t q) {
    uint64_t s = a + b;
    return s >= q ? s - q : s;
}

inline uint64_t sub_mod(uint64_t a, uint64_t b, uint64_t q) {
    return a >= b ? a - b : a + q - b;
}

inline uint64_t neg_mod(uint64_t a, uint64_t q) {
    return a == 0 ? 0 : q - a;
}

// Shoup-precomputed multiplier for a fixed operand w < q: quo = floor(w << 64 / q).
// mul_shoup(x, w, quo, q) == x * w mod q for any x < 2^64, one correction step.
inline uint64_t shoup_precompute(uint64_t w, uint64_t q) {
    return uint64_t((u128(w) << 64) / q);
}

inline uint64_t mul_shoup(uint64_t x, uint64_t w, uint64_t w_quo, uint64_t q) {
    uint64_t hi = uint64_t((u128(x) * w_quo) >> 64);
    uint64_t r = x * w - hi * q;
    return r >= q ? r - q : r;
}

uint64_t pow_mod(uint64_t base, uint64_t exp, const Modulus& mod);
uint64_t inv_mod(uint64_t a, const Modulus& mod);

bool is_prime(uint64_t n);

// Distinct primes with the requested bit sizes, each congruent to 1 mod 2n so
// the negacyclic transform exists.  Scans downward from the top of each bit
// range; deterministic for a given (bit_sizes, two_n).
std::vector<uint64_t> generate_ntt_primes(std::span<const int> bit_sizes, uint64_t two_n);

// Smallest-base primitive 2n-th root of unity mod q.  Deterministic.
uint64_t find_primitive_root(uint64_t two_n, const Modulus& mod);

} // namespace hematch::he
