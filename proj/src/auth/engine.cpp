#include "hematch/auth/engine.hpp"

#include <algorithm>

#include "hematch/common/errors.hpp"

namespace hematch::auth {

namespace {
enum Stage { stage_bias = 0, stage_weights = 1 };
}

std::vector<double> compression_mask(const DynBitset& occupancy, size_t slot_count) {
    if (occupancy.size() * 16 != slot_count)
        throw ShapeError("occupancy size does not match the slot layout");
    std::vector<double> mask(slot_count, 0.0);
    for (size_t j = 0; j < occupancy.size(); ++j)
        if (occupancy.get(j)) mask[16 * j] = 1.0;
    return mask;
}

AuthEngine::AuthEngine(std::shared_ptr<he::SlotBackend> backend, he::RelinKey relin,
                       he::GaloisKeys galois, std::array<double, 16> fc16_bias,
                       std::array<double, 16> fc1_weights)
    : backend_(std::move(backend)),
      relin_(std::move(relin)),
      galois_(std::move(galois)),
      fc16_bias_(fc16_bias),
      fc1_weights_(fc1_weights) {
    if (relin_.params_digest != backend_->params_digest() ||
        galois_.params_digest != backend_->params_digest())
        throw KeyError("evaluation keys belong to a different parameter set");
}

he::Plaintext AuthEngine::tiled_plain(int stage, int level, double scale) const {
    auto key = std::make_tuple(stage, level, scale);
    std::lock_guard lock(cache_mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;

    const auto& src = stage == stage_bias ? fc16_bias_ : fc1_weights_;
    std::vector<double> slots(backend_->params().slot_count);
    for (size_t s = 0; s < slots.size(); ++s) slots[s] = src[s % 16];
    auto plain = backend_->encode(slots, level, scale);
    cache_.emplace(key, plain);
    return plain;
}

he::Ciphertext AuthEngine::score_shard(const he::Ciphertext& c_r,
                                       const he::Ciphertext& c_u) const {
    const int top = backend_->params().max_level;
    if (c_r.level != top || c_u.level != top)
        throw AlignmentError("scoring expects fresh-level ciphertexts");

    auto a = backend_->sub(c_r, c_u);
    a = backend_->add_plain(a, tiled_plain(stage_bias, a.level, a.scale));
    a = backend_->mul(a, a, relin_);
    a = backend_->mul_plain(a, tiled_plain(stage_weights, a.level, a.scale));
    return block_sum(a);
}

he::Ciphertext AuthEngine::block_sum(const he::Ciphertext& a) const {
    auto acc = a;
    for (int s : {8, 4, 2, 1}) acc = backend_->add(acc, backend_->rotate(acc, s, galois_));
    return acc;
}

he::Ciphertext AuthEngine::compress(std::span<const ShardScore> group) const {
    if (group.empty() || group.size() > 16)
        throw ParamError("compression groups hold 1 to 16 shards, got " +
                         std::to_string(group.size()));
    const size_t slot_count = backend_->params().slot_count;

    bool seen[16] = {};
    he::Ciphertext out;
    bool first = true;
    for (const auto& shard : group) {
        if (shard.offset >= 16)
            throw ParamError("compression offset must lie in 0..15");
        if (seen[shard.offset])
            throw ConflictError("duplicate compression offset " + std::to_string(shard.offset));
        seen[shard.offset] = true;

        auto mask = backend_->encode(compression_mask(shard.occupancy, slot_count),
                                     shard.scored.level, shard.scored.scale);
        auto masked = backend_->mul_plain(shard.scored, mask);
        auto placed = backend_->rotate(masked, -int(shard.offset), galois_);
        out = first ? std::move(placed) : backend_->add(out, placed);
        first = false;
    }
    return out;
}

std::vector<CompressedGroup> AuthEngine::full_auth(
    const he::Ciphertext& c_u,
    std::span<const std::shared_ptr<const registry::RegistryShard>> shards) const {
    const size_t slot_count = backend_->params().slot_count;
    const size_t capacity = backend_->params().block_capacity();

    // Group by global shard index; inputs may be any contiguous run, so a
    // worker's partial range produces partial groups.
    std::map<uint32_t, std::vector<const registry::RegistryShard*>> groups;
    for (const auto& shard : shards) {
        if (!shard) throw ParamError("null shard in scoring input");
        groups[shard->shard_index / 16].push_back(shard.get());
    }

    std::vector<CompressedGroup> out;
    out.reserve(groups.size());
    for (const auto& [group_index, members] : groups) {
        std::vector<ShardScore> scored;
        scored.reserve(members.size());
        CompressedGroup g;
        g.group_index = group_index;
        g.valid_slots = DynBitset(slot_count);
        for (const registry::RegistryShard* shard : members) {
            ShardScore s;
            s.scored = score_shard(shard->c_r, c_u);
            s.occupancy = shard->occupancy;
            s.offset = shard->shard_index % 16;
            for (size_t j = 0; j < capacity; ++j)
                if (shard->occupancy.get(j)) g.valid_slots.set(16 * j + s.offset);
            scored.push_back(std::move(s));
        }
        g.result = compress(scored);
        out.push_back(std::move(g));
    }
    return out;
}

} // namespace hematch::auth
