#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hematch::he {

// Residue basis: a prefix of the data primes, optionally extended by the
// key-switching prime.  Prime indices are stable across levels, so residues
// keep their meaning when the basis shrinks.
struct Basis {
    size_t data_primes = 0;
    bool special = false;

    size_t count() const { return data_primes + (special ? 1 : 0); }
    friend bool operator==(const Basis&, const Basis&) = default;
};

// Polynomial in RNS form, prime-major layout: block p holds the n residues
// mod prime p.  Domain (coefficient vs transform) is tracked by the caller;
// ciphertexts are kept in coefficient domain, keys in transform domain.
struct RnsPoly {
    size_t n = 0;
    Basis basis;
    std::vector<uint64_t> data;

    RnsPoly() = default;
    RnsPoly(size_t n_, Basis basis_) : n(n_), basis(basis_), data(n_ * basis_.count(), 0) {}

    uint64_t* block(size_t prime_slot) { return data.data() + prime_slot * n; }
    const uint64_t* block(size_t prime_slot) const { return data.data() + prime_slot * n; }

    // Index of the special-prime block within this poly's layout.
    size_t special_slot() const { return basis.data_primes; }

    friend bool operator==(const RnsPoly&, const RnsPoly&) = default;
};

} // namespace hematch::he
