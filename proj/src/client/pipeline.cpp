#include "hematch/client/pipeline.hpp"

#include <cmath>

#include "hematch/common/errors.hpp"

namespace hematch::client {

namespace {

constexpr size_t dim = he::HeParams::feature_dim;

he::Ciphertext encrypt_slots(const std::vector<double>& slots, const he::SlotBackend& backend,
                             const he::PublicKey& pk) {
    const auto& p = backend.params();
    return backend.encrypt(backend.encode(slots, p.max_level, p.scale()), pk);
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

} // namespace

std::array<double, 16> finalize_features(std::span<const double> x, const Fc16Params& fc16) {
    std::array<double, 16> u = fc16.bias;
    if (fc16.identity()) {
        if (x.size() != dim)
            throw ShapeError("identity finalizer expects 16 features, got " +
                             std::to_string(x.size()));
        for (size_t t = 0; t < dim; ++t) u[t] += x[t];
        return u;
    }
    if (fc16.a_matrix.size() != fc16.input_dim * dim)
        throw ShapeError("finalizer matrix shape does not match its input width");
    if (x.size() != fc16.input_dim)
        throw ShapeError("feature vector length " + std::to_string(x.size()) +
                         " does not match finalizer input width " +
                         std::to_string(fc16.input_dim));
    for (size_t i = 0; i < fc16.input_dim; ++i) {
        const double xi = x[i];
        const double* row = fc16.a_matrix.data() + i * dim;
        for (size_t t = 0; t < dim; ++t) u[t] += xi * row[t];
    }
    return u;
}

he::Ciphertext pack_registration(const std::array<double, 16>& u, const he::SlotBackend& backend,
                                 const he::PublicKey& pk) {
    std::vector<double> slots(backend.params().slot_count, 0.0);
    std::copy(u.begin(), u.end(), slots.begin());
    return encrypt_slots(slots, backend, pk);
}

he::Ciphertext pack_query(const std::array<double, 16>& u, const he::SlotBackend& backend,
                          const he::PublicKey& pk) {
    std::vector<double> slots(backend.params().slot_count);
    for (size_t s = 0; s < slots.size(); ++s) slots[s] = u[s % dim];
    return encrypt_slots(slots, backend, pk);
}

uint64_t recover_index(size_t slot_idx, size_t capacity) {
    if (capacity == 0) throw ParamError("capacity must be positive");
    if (slot_idx >= capacity * dim)
        throw BoundsError("slot " + std::to_string(slot_idx) + " outside the compression layout");
    return uint64_t(capacity) * (slot_idx % dim) + slot_idx / dim;
}

SlotPick select_best(std::span<const double> values, const DynBitset& valid, size_t capacity) {
    if (valid.size() != values.size())
        throw ShapeError("validity bitmap size does not match slot count");
    SlotPick best;
    uint64_t best_global = 0;
    for (size_t s = 0; s < values.size(); ++s) {
        if (!valid.get(s)) continue;
        uint64_t global = recover_index(s, capacity);
        bool take = !best.any || values[s] > best.value ||
                    (values[s] == best.value && global < best_global);
        if (take) {
            best = {true, s, values[s]};
            best_global = global;
        }
    }
    return best;
}

Decision decide(const he::Ciphertext& compressed, const he::SecretKey& sk,
                const DecisionParams& dp, const DynBitset& valid_slots,
                const he::SlotBackend& backend) {
    return decide_all({&compressed, 1}, sk, dp, {&valid_slots, 1}, backend);
}

Decision decide_all(std::span<const he::Ciphertext> groups, const he::SecretKey& sk,
                    const DecisionParams& dp, std::span<const DynBitset> valid_slots,
                    const he::SlotBackend& backend) {
    if (!(dp.threshold > 0.0 && dp.threshold < 1.0))
        throw ParamError("decision threshold must lie strictly between 0 and 1");
    if (groups.size() != valid_slots.size())
        throw ShapeError("one validity bitmap is required per result group");

    const size_t capacity = backend.params().block_capacity();
    Decision best;
    bool any = false;
    uint64_t best_global = 0;
    for (size_t g = 0; g < groups.size(); ++g) {
        auto scores = backend.decrypt(groups[g], sk);
        std::vector<double> probs(scores.size());
        for (size_t s = 0; s < scores.size(); ++s) probs[s] = sigmoid(scores[s] + dp.fc1_bias);

        auto pick = select_best(probs, valid_slots[g], capacity);
        if (!pick.any) continue;
        uint64_t global = (16 * g + pick.slot % dim) * capacity + pick.slot / dim;
        if (!any || pick.value > best.probability ||
            (pick.value == best.probability && global < best_global)) {
            any = true;
            best.probability = pick.value;
            best_global = global;
        }
    }
    if (!any) return Decision{};
    best.matched = best.probability >= dp.threshold;
    best.global_index = best.matched ? best_global : 0;
    return best;
}

} // namespace hematch::client
