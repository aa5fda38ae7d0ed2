#pragma once

#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <tuple>
#include <vector>

#include "hematch/common/bitset.hpp"
#include "hematch/he/backend.hpp"
#include "hematch/registry/registry.hpp"

namespace hematch::auth {

// One scored shard queued for compression.
struct ShardScore {
    he::Ciphertext scored;  // block-sum output, block heads hold scores
    DynBitset occupancy;    // capacity bits
    uint32_t offset = 0;    // global shard index mod 16
};

// One compressed output: scores of up to 16 shards interleaved in a single
// ciphertext, plus the bitmap of slots that carry real registrations.
struct CompressedGroup {
    uint32_t group_index = 0; // global shard index / 16
    he::Ciphertext result;
    DynBitset valid_slots; // slot_count bits
};

// One-hot selector for a shard's occupied block heads: 1.0 at slot 16j for
// each occupied local index j.
std::vector<double> compression_mask(const DynBitset& occupancy, size_t slot_count);

// Encrypted scoring pipeline.  The whole pipeline spends exactly three
// multiplicative levels: the square, the weight multiply, and the
// compression mask.  Stateless apart from a cache of tiled plaintext
// encodings, so one engine serves concurrent requests.
class AuthEngine {
public:
    AuthEngine(std::shared_ptr<he::SlotBackend> backend, he::RelinKey relin,
               he::GaloisKeys galois, std::array<double, 16> fc16_bias,
               std::array<double, 16> fc1_weights);

    const he::SlotBackend& backend() const { return *backend_; }

    // (c_r - c_u + b)^2 * w per slot, then block-summed so every block head
    // 16j carries the score of local index j.  Both inputs must sit at the
    // fresh level.
    he::Ciphertext score_shard(const he::Ciphertext& c_r, const he::Ciphertext& c_u) const;

    // Rotate-and-add at strides 8,4,2,1: slot p of the result is the sum of
    // slots p..p+15 (cyclic) of the input.  Costs no level.
    he::Ciphertext block_sum(const he::Ciphertext& a) const;

    // Mask, rotate right by each shard's offset, accumulate.  1..16 shards
    // per group; offsets within a group must be distinct.
    he::Ciphertext compress(std::span<const ShardScore> group) const;

    // Full pipeline over any contiguous shard run: scores every shard,
    // groups by global shard index / 16, compresses each group.  An empty
    // shard list yields no groups.
    std::vector<CompressedGroup> full_auth(
        const he::Ciphertext& c_u,
        std::span<const std::shared_ptr<const registry::RegistryShard>> shards) const;

private:
    he::Plaintext tiled_plain(int stage, int level, double scale) const;

    std::shared_ptr<he::SlotBackend> backend_;
    he::RelinKey relin_;
    he::GaloisKeys galois_;
    std::array<double, 16> fc16_bias_;
    std::array<double, 16> fc1_weights_;

    mutable std::mutex cache_mu_;
    mutable std::map<std::tuple<int, int, double>, he::Plaintext> cache_;
};

} // namespace hematch::auth
