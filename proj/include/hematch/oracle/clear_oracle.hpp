#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "hematch/client/model.hpp"
#include "hematch/registry/registry.hpp"

namespace hematch::oracle {

// Plaintext mirror of the encrypted registry: finalized 16-wide vectors
// keyed by global index.
struct ClearEntry {
    uint64_t global_index = 0;
    std::array<double, 16> features{};
    std::string user_id;
};

struct ClearRegistry {
    std::vector<ClearEntry> entries;
};

// Reference score, one value per registered entry:
//   score = sum_t w[t] * ((r[t] - u[t]) + b[t])^2
// The 16-term sum is combined pairwise (strides 8,4,2,1) so the result is
// bit-identical to the rotate-and-add reduction on exact slot values.
std::vector<std::pair<uint64_t, double>> clear_score(const ClearRegistry& reg,
                                                     const std::array<double, 16>& u,
                                                     const std::array<double, 16>& b,
                                                     const std::array<double, 16>& w);

// Deliberately different implementation of the same quantity (plain ordered
// accumulation); exists only to cross-check clear_score.
std::vector<std::pair<uint64_t, double>> clear_score_sequential(const ClearRegistry& reg,
                                                                const std::array<double, 16>& u,
                                                                const std::array<double, 16>& b,
                                                                const std::array<double, 16>& w);

// Where a marker registered at marker_index lands after packing, scoring
// layout, and compression, found by simulating those steps on plain arrays.
struct CompressedSlot {
    size_t group = 0;
    size_t slot = 0;
};
CompressedSlot layout_oracle(size_t population, uint64_t marker_index, size_t slot_count);

// Synthetic population with a generation-time margin guarantee: every wrong
// pairing scores far below threshold, every genuine pairing far above, so
// decisions survive encrypted-pipeline noise up to margin/10.
struct SyntheticSpec {
    size_t population = 0;
    double genuine_noise = 0.05;
    double embedding_scale = 2.0;
    uint64_t seed = 1;
    size_t genuine_count = 8;
    size_t imposter_count = 8;
    double margin = 0.1; // probability-space distance from threshold
};

struct LabeledQuery {
    std::array<double, 16> features{};
    uint64_t true_index = 0;
};

struct SyntheticFixture {
    ClearRegistry registry;
    std::vector<LabeledQuery> genuine;
    std::vector<std::array<double, 16>> imposters;
    client::ModelParams model;
};

SyntheticFixture gen_synthetic(const SyntheticSpec& spec);

// Test plumbing: packs a clear registry into shards by bulk slot encoding,
// bypassing the per-user rotate-and-add path.
std::vector<std::shared_ptr<const registry::RegistryShard>> pack_clear_shards(
    const ClearRegistry& reg, const he::SlotBackend& backend, const he::PublicKey& pk);

} // namespace hematch::oracle
