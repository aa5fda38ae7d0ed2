#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "hematch/he/rns.hpp"

namespace hematch::he {

// Key material is deliberately split across types so APIs can demand exactly
// the authority they need: servers take EvalKeys, only the client-side
// decision step takes a SecretKey.  All lattice key polynomials live in the
// transform domain over the full basis (every data prime plus the switching
// prime) and are immutable after generation.

struct SecretKey {
    uint64_t params_digest = 0;
    uint64_t pair_tag = 0;     // random id shared across one generated bundle
    RnsPoly s;                 // transform domain
    std::vector<int8_t> s_raw; // ternary coefficients, needed to derive automorphed keys
};

struct PublicKey {
    uint64_t params_digest = 0;
    uint64_t pair_tag = 0;
    RnsPoly b, a; // b = -a*s + e
};

// One switching key: per data prime j a pair (b_j, a_j) with
// b_j = -a_j*s + e_j + P*crt_j*target, P the switching prime.
struct SwitchKey {
    std::vector<RnsPoly> b, a;
    bool empty() const { return b.empty(); }
};

struct RelinKey {
    uint64_t params_digest = 0;
    SwitchKey key; // target s^2
};

struct GaloisKeys {
    uint64_t params_digest = 0;
    // Keyed by left-rotation step (a power of two); value targets the
    // matching automorphism of s.
    std::map<uint32_t, SwitchKey> by_step;
};

struct EvalKeys {
    PublicKey public_key;
    RelinKey relin;
    GaloisKeys galois;
};

struct KeyBundle {
    SecretKey secret;
    EvalKeys eval;
};

} // namespace hematch::he
