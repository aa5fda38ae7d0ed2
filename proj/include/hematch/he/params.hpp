#pragma once

#include <cstdint>
#include <vector>

namespace hematch::he {

enum class BackendKind : uint8_t {
    lattice = 0, // ring-LWE slot arithmetic
    clear = 1,   // plain slot arithmetic with the same level/scale bookkeeping
};

enum class Profile : uint8_t {
    production = 0, // fixed constants below, secure-size ring, no seeded keygen
    test = 1,       // anything that validates; seeded keygen allowed
};

// Parameter set shared by both backends.  modulus_chain holds bit sizes; the
// last entry is the key-switching prime and never carries ciphertext data, so
// max_level == chain length - 2.
struct HeParams {
    uint32_t poly_degree = 0;
    uint32_t slot_count = 0;
    std::vector<int> modulus_chain;
    int scale_bits = 0;
    int max_level = 0;
    Profile profile = Profile::test;

    static HeParams production();
    static HeParams test_profile();
    static HeParams custom(uint32_t poly_degree, std::vector<int> chain, int scale_bits);

    void validate() const;

    double scale() const { return double(uint64_t(1) << scale_bits); }

    // Slots per identity block and derived capacities; never hard-coded
    // downstream.
    static constexpr uint32_t feature_dim = 16;
    uint32_t block_capacity() const { return slot_count / feature_dim; }

    // FNV-1a over every field plus the derived prime values; embedded in all
    // serialized containers and checked before any arithmetic.
    uint64_t digest() const;

    friend bool operator==(const HeParams&, const HeParams&) = default;
};

} // namespace hematch::he
