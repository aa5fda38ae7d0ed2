#include "hematch/he/modmath.hpp"

#include <string>

#include "hematch/common/errors.hpp"

namespace hematch::he {

Modulus::Modulus(uint64_t q) : value(q) {
    if (q < 2 || q >= (uint64_t(1) << 62)) throw ParamError("modulus out of range: " + std::to_string(q));
    // floor((2^128 - 1) / q) == floor(2^128 / q) for any q that is not a
    // power of two; all chain moduli are odd primes.
    u128 ratio = ~u128(0) / q;
    ratio_hi = uint64_t(ratio >> 64);
    ratio_lo = uint64_t(ratio);
}

uint64_t pow_mod(uint64_t base, uint64_t exp, const Modulus& mod) {
    uint64_t acc = 1;
    uint64_t b = base >= mod.value ? base % mod.value : base;
    while (exp) {
        if (exp & 1) acc = mod.mul(acc, b);
        b = mod.mul(b, b);
        exp >>= 1;
    }
    return acc;
}

uint64_t inv_mod(uint64_t a, const Modulus& mod) {
    if (a == 0) throw ParamError("inverse of zero");
    // mod.value is prime throughout this codebase.
    return pow_mod(a, mod.value - 2, mod);
}

bool is_prime(uint64_t n) {
    if (n < 2) return false;
    for (uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n == p) return true;
        if (n % p == 0) return false;
    }
    uint64_t d = n - 1;
    int r = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++r;
    }
    Modulus mod(n);
    // This base set decides primality for every n < 2^64.
    for (uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        uint64_t x = pow_mod(a, d, mod);
        if (x == 1 || x == n - 1) continue;
        bool witness = true;
        for (int i = 1; i < r; ++i) {
            x = mod.mul(x, x);
            if (x == n - 1) {
                witness = false;
                break;
            }
        }
        if (witness) return false;
    }
    return true;
}

std::vector<uint64_t> generate_ntt_primes(std::span<const int> bit_sizes, uint64_t two_n) {
    std::vector<uint64_t> out;
    out.reserve(bit_sizes.size());
    for (int bits : bit_sizes) {
        if (bits < 20 || bits > 60) throw ParamError("modulus bit size must be in [20, 60]");
        // Largest candidate below 2^bits congruent to 1 mod 2n.
        uint64_t top = uint64_t(1) << bits;
        uint64_t c = (top - 2) / two_n * two_n + 1;
        while (true) {
            if (c < (uint64_t(1) << (bits - 1))) throw ParamError("no prime found in bit range");
            bool taken = false;
            for (uint64_t q : out)
                if (q == c) taken = true;
            if (!taken && is_prime(c)) break;
            c -= two_n;
        }
        out.push_back(c);
    }
    return out;
}

uint64_t find_primitive_root(uint64_t two_n, const Modulus& mod) {
    if ((mod.value - 1) % two_n != 0) throw ParamError("modulus does not support transform order");
    uint64_t cofactor = (mod.value - 1) / two_n;
    for (uint64_t base = 2;; ++base) {
        uint64_t g = pow_mod(base, cofactor, mod);
        // g has order dividing 2n; g^n == -1 pins the order to exactly 2n.
        if (pow_mod(g, two_n / 2, mod) == mod.value - 1) return g;
        if (base > 1000) throw ParamError("no primitive root found");
    }
}

} // namespace hematch::he
