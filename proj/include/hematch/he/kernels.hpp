#pragma once

#include <span>

#include "hematch/he/context.hpp"
#include "hematch/he/rns.hpp"

namespace hematch::he::kern {

// Every kernel runs under a policy: serial is the reference path, parallel
// fans the independent (polynomial, prime-block) units out across OpenMP
// threads.  Both paths run identical per-block code on disjoint data, so
// results are bit-identical; tests assert that and the benchmark tool
// compares throughput.
enum class Policy { serial, parallel };

Policy default_policy();
void set_default_policy(Policy p);

// One transform unit: a single prime block of a single polynomial.
struct NttUnit {
    uint64_t* data;
    const PrimeTables* tables;
};

void ntt_forward_units(std::span<const NttUnit> units, Policy policy);
void ntt_inverse_units(std::span<const NttUnit> units, Policy policy);

// Pointwise units for callers that wire blocks across polys with different
// bases (key switching reads full-basis key blocks against level-basis data).
struct MulUnit {
    const uint64_t* a;
    const uint64_t* b;
    uint64_t* out; // mul: out = a*b; mac: out += a*b
    const Modulus* mod;
};

void mul_units(std::span<const MulUnit> units, size_t n, Policy policy);
void mac_units(std::span<const MulUnit> units, size_t n, Policy policy);

void ntt_forward(const RingContext& ctx, RnsPoly& a, Policy policy);
void ntt_inverse(const RingContext& ctx, RnsPoly& a, Policy policy);

// Pointwise ops over matching bases.  out may alias a or b.
void add(const RingContext& ctx, const RnsPoly& a, const RnsPoly& b, RnsPoly& out, Policy policy);
void sub(const RingContext& ctx, const RnsPoly& a, const RnsPoly& b, RnsPoly& out, Policy policy);
void mul(const RingContext& ctx, const RnsPoly& a, const RnsPoly& b, RnsPoly& out, Policy policy);
void mac(const RingContext& ctx, const RnsPoly& a, const RnsPoly& b, RnsPoly& acc, Policy policy);
void negate(const RingContext& ctx, RnsPoly& a, Policy policy);

// out[(i * g mod 2n) wrapped] = +-a[i]; coefficient domain only.
void automorphism(const RingContext& ctx, const RnsPoly& a, uint32_t galois_element, RnsPoly& out,
                  Policy policy);

// Spreads the residues of one source block (values < source prime) across
// every block of dst, reducing as needed.  Used by key-switch decomposition.
void spread_residue(const RingContext& ctx, const uint64_t* src, size_t src_prime_index, RnsPoly& dst,
                    Policy policy);

// Exact division after dropping one block: for every remaining block j,
// out_j = (in_j - centered(in_div)) * div_prime^-1 mod q_j.  This is the
// shared tail of rescaling (divisor = last data prime) and key switching
// (divisor = the switching prime).
void div_drop_block(const RingContext& ctx, const RnsPoly& in, size_t div_slot, size_t div_prime_index,
                    std::span<const uint64_t> div_inv_per_block, RnsPoly& out, Policy policy);

size_t prime_index_of(const RingContext& ctx, const Basis& basis, size_t slot);

} // namespace hematch::he::kern
