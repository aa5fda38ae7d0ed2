#pragma once

#include <array>
#include <span>
#include <vector>

#include "hematch/client/model.hpp"
#include "hematch/common/bitset.hpp"
#include "hematch/he/backend.hpp"

namespace hematch::client {

// u = xA + b.  ShapeError when |x| does not match the finalizer's input
// width (16 for the identity finalizer).
std::array<double, 16> finalize_features(std::span<const double> x, const Fc16Params& fc16);

// Registration packing: u in slots 0..15, zeros elsewhere.
he::Ciphertext pack_registration(const std::array<double, 16>& u, const he::SlotBackend& backend,
                                 const he::PublicKey& pk);

// Query packing: u tiled across every 16-slot block.
he::Ciphertext pack_query(const std::array<double, 16>& u, const he::SlotBackend& backend,
                          const he::PublicKey& pk);

struct Decision {
    bool matched = false;
    uint64_t global_index = 0; // meaningful only when matched
    double probability = 0.0;  // sigmoid at the winning slot; 0 when no slot is valid
};

// Argmax over valid slots with deterministic tie-breaking: on exact value
// ties the slot with the lowest recovered global index wins.
struct SlotPick {
    bool any = false;
    size_t slot = 0;
    double value = 0.0;
};
SlotPick select_best(std::span<const double> values, const DynBitset& valid, size_t capacity);

// Compressed slot -> global user index: capacity*(slot mod 16) + slot div 16.
uint64_t recover_index(size_t slot_idx, size_t capacity);

// Decrypts one compressed result group, adds the scalar bias, applies the
// sigmoid, and thresholds the best valid slot.
Decision decide(const he::Ciphertext& compressed, const he::SecretKey& sk,
                const DecisionParams& dp, const DynBitset& valid_slots,
                const he::SlotBackend& backend);

// Multi-group variant: group g covers shards 16g..16g+15, so slot s of group
// g recovers to global index (16g + s mod 16)*capacity + s div 16.
Decision decide_all(std::span<const he::Ciphertext> groups, const he::SecretKey& sk,
                    const DecisionParams& dp, std::span<const DynBitset> valid_slots,
                    const he::SlotBackend& backend);

} // namespace hematch::client
