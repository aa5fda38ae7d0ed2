#pragma once

#include <cstdint>
#include <memory>
#include <unordered_map>
#include <vector>

#include "hematch/he/modmath.hpp"
#include "hematch/he/params.hpp"
#include "hematch/he/rns.hpp"

namespace hematch::he {

// Per-prime transform tables.  Root powers are stored in the bit-reversed
// order consumed by the merged negacyclic butterflies, with Shoup companions
// for the fixed operand.
struct PrimeTables {
    Modulus mod;
    std::vector<uint64_t> root_br, root_br_quo;
    std::vector<uint64_t> root_inv_br, root_inv_br_quo;
    uint64_t n_inv = 0, n_inv_quo = 0;
};

// Shared immutable state derived from a parameter set: the concrete prime
// chain, transform tables, automorphism index maps for the supported rotation
// steps, and the slot-to-exponent table for the canonical embedding.
//
// The clear backend constructs it without tables (prime values are still
// needed so scale bookkeeping matches the lattice backend bit for bit).
class RingContext {
public:
    RingContext(const HeParams& params, bool build_tables);

    const HeParams& params() const { return params_; }
    uint64_t params_digest() const { return digest_; }

    size_t n() const { return params_.poly_degree; }
    size_t data_prime_count() const { return primes_.size() - 1; }
    uint64_t prime(size_t i) const { return primes_[i]; }
    uint64_t special_prime() const { return primes_.back(); }

    const PrimeTables& tables(size_t prime_index) const;
    const PrimeTables& special_tables() const { return tables(primes_.size() - 1); }

    // Basis helpers.  Level l spans primes [0, l].
    Basis level_basis(int level) const { return Basis{size_t(level) + 1, false}; }
    const Modulus& modulus(size_t prime_index) const { return moduli_[prime_index]; }
    const Modulus& special_modulus() const { return moduli_.back(); }

    // q_inv_table(l)[j] = primes[l]^-1 mod primes[j] for j < l (rescale).
    uint64_t dropped_prime_inv(int dropped_index, size_t j) const {
        return drop_inv_[size_t(dropped_index)][j];
    }
    // Key-switching prime helpers per data prime.
    uint64_t special_inv_mod(size_t j) const { return special_inv_[j]; }
    uint64_t special_mod(size_t j) const { return special_red_[j]; }

    // Galois element for a left rotation by 2^t slots, and the coefficient
    // permutation (index in low 31 bits, negate flag in bit 31).
    static constexpr uint32_t auto_negate_bit = 0x80000000u;
    uint32_t rotation_element(size_t pow2_index) const { return rot_elements_[pow2_index]; }
    size_t rotation_element_count() const { return rot_elements_.size(); }
    const std::vector<uint32_t>& automorphism_map(uint32_t galois_element) const;

    // 5^t mod 2n, the evaluation exponent backing slot t.
    const std::vector<uint32_t>& slot_exponents() const { return slot_exp_; }

    bool has_tables() const { return !tables_.empty(); }

private:
    HeParams params_;
    uint64_t digest_ = 0;
    std::vector<uint64_t> primes_; // data primes then the switching prime
    std::vector<Modulus> moduli_;
    std::vector<PrimeTables> tables_;
    std::vector<std::vector<uint64_t>> drop_inv_;
    std::vector<uint64_t> special_inv_, special_red_;
    std::vector<uint32_t> rot_elements_;
    std::unordered_map<uint32_t, std::vector<uint32_t>> auto_maps_;
    std::vector<uint32_t> slot_exp_;
};

std::shared_ptr<const RingContext> make_context(const HeParams& params, bool build_tables);

} // namespace hematch::he
