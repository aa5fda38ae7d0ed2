#include "hematch/oracle/clear_oracle.hpp"

#include <cmath>
#include <random>

#include "hematch/common/errors.hpp"

namespace hematch::oracle {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::array<double, 16> block_terms(const std::array<double, 16>& r,
                                   const std::array<double, 16>& u,
                                   const std::array<double, 16>& b,
                                   const std::array<double, 16>& w) {
    std::array<double, 16> v{};
    for (size_t t = 0; t < 16; ++t) {
        double x = (r[t] - u[t]) + b[t];
        v[t] = x * x * w[t];
    }
    return v;
}

double score_one(const std::array<double, 16>& r, const std::array<double, 16>& u,
                 const std::array<double, 16>& b, const std::array<double, 16>& w) {
    auto v = block_terms(r, u, b, w);
    // Same combination order as four rotate-and-add rounds at strides
    // 8,4,2,1, so exact-arithmetic backends agree bit for bit.
    std::array<double, 4> pairs{};
    for (size_t k = 0; k < 4; ++k) pairs[k] = (v[k] + v[k + 8]) + (v[k + 4] + v[k + 12]);
    return (pairs[0] + pairs[2]) + (pairs[1] + pairs[3]);
}

} // namespace

std::vector<std::pair<uint64_t, double>> clear_score(const ClearRegistry& reg,
                                                     const std::array<double, 16>& u,
                                                     const std::array<double, 16>& b,
                                                     const std::array<double, 16>& w) {
    std::vector<std::pair<uint64_t, double>> out;
    out.reserve(reg.entries.size());
    for (const auto& e : reg.entries) out.emplace_back(e.global_index, score_one(e.features, u, b, w));
    return out;
}

std::vector<std::pair<uint64_t, double>> clear_score_sequential(const ClearRegistry& reg,
                                                                const std::array<double, 16>& u,
                                                                const std::array<double, 16>& b,
                                                                const std::array<double, 16>& w) {
    std::vector<std::pair<uint64_t, double>> out;
    out.reserve(reg.entries.size());
    for (const auto& e : reg.entries) {
        double s = 0;
        for (size_t t = 0; t < 16; ++t) {
            double x = (e.features[t] - u[t]) + b[t];
            s += w[t] * x * x;
        }
        out.emplace_back(e.global_index, s);
    }
    return out;
}

CompressedSlot layout_oracle(size_t population, uint64_t marker_index, size_t slot_count) {
    if (slot_count == 0 || slot_count % 16 != 0)
        throw ParamError("slot count must be a positive multiple of 16");
    if (marker_index >= population)
        throw BoundsError("marker index outside the population");

    const size_t capacity = slot_count / 16;
    const size_t shard_count = (population + capacity - 1) / capacity;
    const size_t group_count = (shard_count + 15) / 16;

    for (size_t g = 0; g < group_count; ++g) {
        std::vector<double> acc(slot_count, 0.0);
        for (size_t i = 0; i < 16; ++i) {
            size_t shard = 16 * g + i;
            if (shard >= shard_count) break;

            // Block-head layout after scoring: slot 16j carries the score of
            // global index shard*capacity + j.
            std::vector<double> heads(slot_count, 0.0);
            for (size_t j = 0; j < capacity; ++j) {
                uint64_t global = uint64_t(shard) * capacity + j;
                if (global < population && global == marker_index) heads[16 * j] = 1.0;
            }

            // Mask keeps occupied block heads (already enforced above), then
            // the shard is rotated right by its compression offset.
            size_t offset = shard % 16;
            for (size_t p = 0; p < slot_count; ++p)
                acc[(p + offset) % slot_count] += heads[p];
        }
        for (size_t s = 0; s < slot_count; ++s)
            if (acc[s] != 0.0) return {g, s};
    }
    throw BoundsError("marker not found in any compression group");
}

SyntheticFixture gen_synthetic(const SyntheticSpec& spec) {
    if (spec.population == 0) throw ConfigError("population must be positive");
    if (!(spec.genuine_noise >= 0) || !(spec.embedding_scale > 0))
        throw ConfigError("synthetic spec has invalid noise or scale");
    if (spec.genuine_count > spec.population)
        throw ConfigError("more genuine queries than registered users");

    SyntheticFixture fx;
    fx.model.fc16.bias.fill(0.0);
    fx.model.fc1_weights.fill(-1.0);
    fx.model.decision.fc1_bias = 0.0;
    fx.model.decision.threshold = 0.2;

    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> embed(-spec.embedding_scale, spec.embedding_scale);
    std::normal_distribution<double> noise(0.0, spec.genuine_noise);

    fx.registry.entries.resize(spec.population);
    for (size_t i = 0; i < spec.population; ++i) {
        auto& e = fx.registry.entries[i];
        e.global_index = i;
        e.user_id = "user-" + std::to_string(i);
        for (auto& v : e.features) v = embed(rng);
    }

    // Genuine queries target evenly spread users so multi-shard layouts get
    // exercised without a second pass over the rng stream.
    fx.genuine.resize(spec.genuine_count);
    for (size_t k = 0; k < spec.genuine_count; ++k) {
        uint64_t target = uint64_t(k) * spec.population / spec.genuine_count;
        auto& q = fx.genuine[k];
        q.true_index = target;
        q.features = fx.registry.entries[target].features;
        for (auto& v : q.features) v += noise(rng);
    }

    fx.imposters.resize(spec.imposter_count);
    for (auto& imp : fx.imposters)
        for (auto& v : imp) v = embed(rng);

    // Margin guarantee, checked at generation: genuine pairs sit at least
    // `margin` above threshold in probability space, every wrong pair at
    // least `margin` below.
    const auto& b = fx.model.fc16.bias;
    const auto& w = fx.model.fc1_weights;
    const double hi = fx.model.decision.threshold + spec.margin;
    const double lo = fx.model.decision.threshold - spec.margin;
    for (const auto& q : fx.genuine) {
        for (const auto& e : fx.registry.entries) {
            double p = sigmoid(score_one(e.features, q.features, b, w));
            if (e.global_index == q.true_index) {
                if (p < hi)
                    throw ConfigError("genuine margin violated for user " + e.user_id);
            } else if (p > lo) {
                throw ConfigError("cross-match margin violated between user " + e.user_id +
                                  " and a genuine query for index " +
                                  std::to_string(q.true_index));
            }
        }
    }
    for (size_t k = 0; k < fx.imposters.size(); ++k)
        for (const auto& e : fx.registry.entries)
            if (sigmoid(score_one(e.features, fx.imposters[k], b, w)) > lo)
                throw ConfigError("imposter " + std::to_string(k) +
                                  " margin violated against user " + e.user_id);
    return fx;
}

std::vector<std::shared_ptr<const registry::RegistryShard>> pack_clear_shards(
    const ClearRegistry& reg, const he::SlotBackend& backend, const he::PublicKey& pk) {
    const auto& params = backend.params();
    const size_t capacity = params.block_capacity();

    uint64_t max_index = 0;
    for (const auto& e : reg.entries) max_index = std::max(max_index, e.global_index);
    size_t shard_count = reg.entries.empty() ? 0 : size_t(max_index / capacity) + 1;

    std::vector<std::vector<double>> slots(shard_count,
                                           std::vector<double>(params.slot_count, 0.0));
    std::vector<DynBitset> occupancy(shard_count, DynBitset(capacity));
    for (const auto& e : reg.entries) {
        size_t shard = size_t(e.global_index / capacity);
        size_t local = size_t(e.global_index % capacity);
        if (occupancy[shard].get(local))
            throw ConflictError("duplicate global index " + std::to_string(e.global_index));
        occupancy[shard].set(local);
        for (size_t t = 0; t < 16; ++t) slots[shard][16 * local + t] = e.features[t];
    }

    std::vector<std::shared_ptr<const registry::RegistryShard>> out;
    out.reserve(shard_count);
    for (size_t s = 0; s < shard_count; ++s) {
        auto shard = std::make_shared<registry::RegistryShard>();
        shard->shard_index = static_cast<uint32_t>(s);
        shard->occupancy = std::move(occupancy[s]);
        shard->c_r = backend.encrypt(
            backend.encode(slots[s], params.max_level, params.scale()), pk);
        out.push_back(std::move(shard));
    }
    return out;
}

} // namespace hematch::oracle
