#include <algorithm>
#include <cmath>
#include <random>

#include "hematch/he/backend.hpp"
#include "validate.hpp"

namespace hematch::he {

// Reference backend: identical level/scale bookkeeping and key plumbing, but
// slots are stored and combined directly.  Serves as the exact oracle the
// lattice backend is tested against and as a fast drop-in for protocol-level
// work.
class ClearBackend final : public SlotBackend {
public:
    explicit ClearBackend(std::shared_ptr<const RingContext> ctx)
        : SlotBackend(std::move(ctx), BackendKind::clear) {}

    KeyBundle keygen(std::optional<uint64_t> seed) const override {
        if (seed && params().profile == Profile::production)
            throw ParamError("seeded key generation is limited to the test profile");
        std::mt19937_64 rng(seed ? *seed : std::random_device{}());
        KeyBundle kb;
        uint64_t digest = ctx_->params_digest();
        uint64_t tag = rng();
        kb.secret.params_digest = digest;
        kb.secret.pair_tag = tag;
        kb.eval.public_key.params_digest = digest;
        kb.eval.public_key.pair_tag = tag;
        kb.eval.relin.params_digest = digest;
        kb.eval.galois.params_digest = digest;
        // Same rotation-step inventory as the lattice backend so missing-key
        // errors behave identically; the key bodies stay empty.
        for (size_t t = 0; t < ctx_->rotation_element_count(); ++t)
            kb.eval.galois.by_step.emplace(uint32_t(1) << t, SwitchKey{});
        return kb;
    }

    Plaintext encode(std::span<const double> slots, int level, double scale) const override {
        if (slots.size() != params().slot_count) throw ShapeError("slot vector length mismatch");
        for (double v : slots)
            if (!std::isfinite(v)) throw ShapeError("slot values must be finite");
        if (level < 0 || level > params().max_level) throw ParamError("encode level out of range");
        if (!(scale > 0.0)) throw ParamError("encode scale must be positive");
        Plaintext p;
        p.backend = BackendKind::clear;
        p.params_digest = ctx_->params_digest();
        p.level = level;
        p.scale = scale;
        p.slots.assign(slots.begin(), slots.end());
        return p;
    }

    std::vector<double> decode(const Plaintext& p) const override {
        detail::check_plaintext(*ctx_, kind_, p, "plaintext");
        return p.slots;
    }

    Ciphertext encrypt(const Plaintext& p, const PublicKey& pk) const override {
        detail::check_plaintext(*ctx_, kind_, p, "plaintext");
        detail::check_digest(pk.params_digest, ctx_->params_digest(), "public key");
        Ciphertext c;
        c.backend = BackendKind::clear;
        c.params_digest = ctx_->params_digest();
        c.level = p.level;
        c.scale = p.scale;
        c.slots = p.slots;
        c.key_tag = pk.pair_tag;
        thread_local std::mt19937_64 rng(std::random_device{}());
        c.nonce = rng();
        return c;
    }

    std::vector<double> decrypt(const Ciphertext& c, const SecretKey& sk) const override {
        detail::check_ciphertext(*ctx_, kind_, c, "ciphertext");
        detail::check_digest(sk.params_digest, ctx_->params_digest(), "secret key");
        if (c.key_tag != sk.pair_tag) throw KeyError("ciphertext was not produced under this key pair");
        return c.slots;
    }

    Ciphertext add(const Ciphertext& a, const Ciphertext& b) const override { return zip(a, b, std::plus<double>()); }
    Ciphertext sub(const Ciphertext& a, const Ciphertext& b) const override { return zip(a, b, std::minus<double>()); }

    Ciphertext add_plain(const Ciphertext& a, const Plaintext& p) const override {
        detail::check_ciphertext(*ctx_, kind_, a, "ciphertext");
        detail::check_plaintext(*ctx_, kind_, p, "plaintext");
        detail::check_same_level(a.level, p.level);
        detail::check_same_scale(a.scale, p.scale);
        Ciphertext out = a;
        for (size_t i = 0; i < out.slots.size(); ++i) out.slots[i] += p.slots[i];
        return out;
    }

    Ciphertext mul_plain(const Ciphertext& a, const Plaintext& p) const override {
        detail::check_ciphertext(*ctx_, kind_, a, "ciphertext");
        detail::check_plaintext(*ctx_, kind_, p, "plaintext");
        detail::check_same_level(a.level, p.level);
        detail::check_mul_depth(a.level);
        Ciphertext out = a;
        for (size_t i = 0; i < out.slots.size(); ++i) out.slots[i] *= p.slots[i];
        drop_level(out, a.scale * p.scale);
        return out;
    }

    Ciphertext mul(const Ciphertext& a, const Ciphertext& b, const RelinKey& rk) const override {
        detail::check_ciphertext(*ctx_, kind_, a, "left operand");
        detail::check_ciphertext(*ctx_, kind_, b, "right operand");
        detail::check_same_level(a.level, b.level);
        detail::check_same_scale(a.scale, b.scale);
        detail::check_mul_depth(a.level);
        detail::check_digest(rk.params_digest, ctx_->params_digest(), "relinearization key");
        Ciphertext out = zip_unchecked(a, b, std::multiplies<double>());
        drop_level(out, a.scale * b.scale);
        return out;
    }

    Ciphertext rotate(const Ciphertext& a, int steps, const GaloisKeys& gk) const override {
        detail::check_ciphertext(*ctx_, kind_, a, "ciphertext");
        detail::check_digest(gk.params_digest, ctx_->params_digest(), "rotation keys");
        int64_t slots = params().slot_count;
        int64_t m = int64_t(steps) % slots;
        if (m < 0) m += slots;
        // Demand the same power-of-two key inventory the lattice path needs.
        for (size_t t = 0; (m >> t) != 0; ++t) {
            if (((m >> t) & 1) == 0) continue;
            if (!gk.by_step.count(uint32_t(1) << t))
                throw KeyError("rotation key for step " + std::to_string(uint32_t(1) << t) + " missing");
        }
        Ciphertext out = a;
        std::rotate(out.slots.begin(), out.slots.begin() + size_t(m), out.slots.end());
        return out;
    }

private:
    template <typename Op>
    Ciphertext zip(const Ciphertext& a, const Ciphertext& b, Op op) const {
        detail::check_ciphertext(*ctx_, kind_, a, "left operand");
        detail::check_ciphertext(*ctx_, kind_, b, "right operand");
        detail::check_same_level(a.level, b.level);
        detail::check_same_scale(a.scale, b.scale);
        return zip_unchecked(a, b, op);
    }

    template <typename Op>
    Ciphertext zip_unchecked(const Ciphertext& a, const Ciphertext& b, Op op) const {
        Ciphertext out = a;
        for (size_t i = 0; i < out.slots.size(); ++i) out.slots[i] = op(a.slots[i], b.slots[i]);
        return out;
    }

    // Mirrors the lattice rescale: values are exact, only the bookkeeping
    // moves, using the same concrete prime so scale drift matches bit for bit.
    void drop_level(Ciphertext& c, double raw_scale) const {
        c.scale = raw_scale / double(ctx_->prime(size_t(c.level)));
        c.level -= 1;
    }

    friend class SlotBackend;
};

std::unique_ptr<SlotBackend> make_clear_backend(std::shared_ptr<const RingContext> ctx) {
    return std::make_unique<ClearBackend>(std::move(ctx));
}

} // namespace hematch::he
