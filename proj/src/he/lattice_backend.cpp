#include <atomic>
#include <random>

#include "hematch/he/backend.hpp"
#include "hematch/he/embedding.hpp"
#include "hematch/he/kernels.hpp"
#include "validate.hpp"

namespace hematch::he {

namespace {

constexpr double error_stddev = 3.2;

uint64_t fresh_seed() {
    static std::atomic<uint64_t> counter{0};
    std::random_device rd;
    uint64_t s = (uint64_t(rd()) << 32) ^ uint64_t(rd());
    return s ^ (counter.fetch_add(1) * 0x9e3779b97f4a7c15ULL);
}

std::mt19937_64& encryption_rng() {
    thread_local std::mt19937_64 rng(fresh_seed());
    return rng;
}

std::vector<int8_t> sample_ternary(std::mt19937_64& rng, size_t n) {
    std::uniform_int_distribution<int> d(-1, 1);
    std::vector<int8_t> out(n);
    for (auto& v : out) v = int8_t(d(rng));
    return out;
}

std::vector<int64_t> sample_error(std::mt19937_64& rng, size_t n) {
    std::normal_distribution<double> d(0.0, error_stddev);
    std::vector<int64_t> out(n);
    for (auto& v : out) v = llround(d(rng));
    return out;
}

void sample_uniform_poly(std::mt19937_64& rng, const RingContext& ctx, RnsPoly& p) {
    for (size_t s = 0; s < p.basis.count(); ++s) {
        uint64_t q = ctx.prime(kern::prime_index_of(ctx, p.basis, s));
        uint64_t limit = q * (UINT64_MAX / q); // rejection bound for unbiased draws
        uint64_t* blk = p.block(s);
        for (size_t i = 0; i < p.n; ++i) {
            uint64_t v;
            do {
                v = rng();
            } while (v >= limit);
            blk[i] = v % q;
        }
    }
}

template <typename Int>
RnsPoly signed_to_rns(const RingContext& ctx, std::span<const Int> coeffs, Basis basis) {
    RnsPoly out(ctx.n(), basis);
    for (size_t s = 0; s < basis.count(); ++s) {
        uint64_t q = ctx.prime(kern::prime_index_of(ctx, basis, s));
        uint64_t* blk = out.block(s);
        for (size_t i = 0; i < out.n; ++i) {
            int64_t c = int64_t(coeffs[i]);
            blk[i] = c >= 0 ? uint64_t(c) % q : q - (uint64_t(-c) % q);
        }
    }
    return out;
}

void add_signed_inplace(const RingContext& ctx, RnsPoly& p, std::span<const int64_t> e) {
    for (size_t s = 0; s < p.basis.count(); ++s) {
        uint64_t q = ctx.prime(kern::prime_index_of(ctx, p.basis, s));
        uint64_t* blk = p.block(s);
        for (size_t i = 0; i < p.n; ++i) {
            uint64_t ev = e[i] >= 0 ? uint64_t(e[i]) % q : q - (uint64_t(-e[i]) % q);
            blk[i] = add_mod(blk[i], ev, q);
        }
    }
}

std::vector<int8_t> automorph_signed(std::span<const int8_t> s, const std::vector<uint32_t>& map) {
    std::vector<int8_t> out(s.size());
    for (size_t i = 0; i < s.size(); ++i) {
        uint32_t entry = map[i];
        int8_t v = s[i];
        out[entry & ~RingContext::auto_negate_bit] = (entry & RingContext::auto_negate_bit) ? int8_t(-v) : v;
    }
    return out;
}

} // namespace

class LatticeBackend final : public SlotBackend {
public:
    explicit LatticeBackend(std::shared_ptr<const RingContext> ctx)
        : SlotBackend(std::move(ctx), BackendKind::lattice), codec_(*ctx_) {}

    KeyBundle keygen(std::optional<uint64_t> seed) const override {
        if (seed && params().profile == Profile::production)
            throw ParamError("seeded key generation is limited to the test profile");
        std::mt19937_64 rng(seed ? *seed : fresh_seed());

        const RingContext& ctx = *ctx_;
        size_t n = ctx.n();
        size_t K = ctx.data_prime_count();
        Basis full{K, true};

        KeyBundle kb;
        kb.secret.params_digest = ctx.params_digest();
        kb.secret.pair_tag = rng();
        kb.secret.s_raw = sample_ternary(rng, n);
        kb.secret.s = signed_to_rns<int8_t>(ctx, kb.secret.s_raw, full);
        kern::ntt_forward(ctx, kb.secret.s, kern::default_policy());
        const RnsPoly& s = kb.secret.s;

        PublicKey& pk = kb.eval.public_key;
        pk.params_digest = ctx.params_digest();
        pk.pair_tag = kb.secret.pair_tag;
        pk.a = RnsPoly(n, full);
        sample_uniform_poly(rng, ctx, pk.a);
        {
            auto e = sample_error(rng, n);
            RnsPoly en = signed_to_rns<int64_t>(ctx, e, full);
            kern::ntt_forward(ctx, en, kern::default_policy());
            RnsPoly as(n, full);
            kern::mul(ctx, pk.a, s, as, kern::default_policy());
            kern::negate(ctx, as, kern::default_policy());
            kern::add(ctx, as, en, pk.b, kern::default_policy());
        }

        kb.eval.relin.params_digest = ctx.params_digest();
        {
            RnsPoly s2(n, full);
            kern::mul(ctx, s, s, s2, kern::default_policy());
            kb.eval.relin.key = make_switch_key(rng, s, s2);
        }

        kb.eval.galois.params_digest = ctx.params_digest();
        for (size_t t = 0; t < ctx.rotation_element_count(); ++t) {
            uint32_t g = ctx.rotation_element(t);
            auto s_rot_raw = automorph_signed(kb.secret.s_raw, ctx.automorphism_map(g));
            RnsPoly target = signed_to_rns<int8_t>(ctx, s_rot_raw, full);
            kern::ntt_forward(ctx, target, kern::default_policy());
            kb.eval.galois.by_step.emplace(uint32_t(1) << t, make_switch_key(rng, s, target));
        }
        return kb;
    }

    Plaintext encode(std::span<const double> slots, int level, double scale) const override {
        if (level < 0 || level > params().max_level) throw ParamError("encode level out of range");
        if (!(scale > 0.0)) throw ParamError("encode scale must be positive");
        Plaintext p;
        p.backend = BackendKind::lattice;
        p.params_digest = ctx_->params_digest();
        p.level = level;
        p.scale = scale;
        std::vector<int64_t> coeffs(ctx_->n());
        codec_.encode(slots, scale, coeffs);
        p.poly = signed_to_rns<int64_t>(*ctx_, coeffs, ctx_->level_basis(level));
        return p;
    }

    std::vector<double> decode(const Plaintext& p) const override {
        detail::check_plaintext(*ctx_, kind_, p, "plaintext");
        std::vector<double> out(params().slot_count);
        codec_.decode(centered_block0(p.poly), p.scale, out);
        return out;
    }

    Ciphertext encrypt(const Plaintext& p, const PublicKey& pk) const override {
        detail::check_plaintext(*ctx_, kind_, p, "plaintext");
        detail::check_digest(pk.params_digest, ctx_->params_digest(), "public key");
        if (pk.a.data.empty()) throw KeyError("public key is empty");
        const RingContext& ctx = *ctx_;
        auto& rng = encryption_rng();
        Basis basis = ctx.level_basis(p.level);
        size_t n = ctx.n();

        RnsPoly u = signed_to_rns<int8_t>(ctx, sample_ternary(rng, n), basis);
        kern::ntt_forward(ctx, u, kern::default_policy());

        Ciphertext c;
        c.backend = BackendKind::lattice;
        c.params_digest = ctx.params_digest();
        c.level = p.level;
        c.scale = p.scale;
        c.comps.assign(2, RnsPoly(n, basis));

        // pk polys span the full key basis; data-prime blocks line up by index.
        std::vector<kern::MulUnit> units;
        for (size_t s = 0; s < basis.count(); ++s) {
            const Modulus* mod = &ctx.modulus(s);
            units.push_back({pk.b.block(s), u.block(s), c.comps[0].block(s), mod});
            units.push_back({pk.a.block(s), u.block(s), c.comps[1].block(s), mod});
        }
        kern::mul_units(units, n, kern::default_policy());
        kern::ntt_inverse(ctx, c.comps[0], kern::default_policy());
        kern::ntt_inverse(ctx, c.comps[1], kern::default_policy());

        add_signed_inplace(ctx, c.comps[0], sample_error(rng, n));
        add_signed_inplace(ctx, c.comps[1], sample_error(rng, n));
        kern::add(ctx, c.comps[0], p.poly, c.comps[0], kern::default_policy());
        return c;
    }

    std::vector<double> decrypt(const Ciphertext& c, const SecretKey& sk) const override {
        detail::check_ciphertext(*ctx_, kind_, c, "ciphertext");
        detail::check_digest(sk.params_digest, ctx_->params_digest(), "secret key");
        if (sk.s.data.empty()) throw KeyError("secret key is empty");
        const RingContext& ctx = *ctx_;
        size_t n = ctx.n();

        // The message plus noise stays far below the first prime, so the
        // residue mod q0 determines the centered value exactly.
        std::vector<uint64_t> t(c.comps[1].block(0), c.comps[1].block(0) + n);
        kern::NttUnit unit{t.data(), &ctx.tables(0)};
        kern::ntt_forward_units({&unit, 1}, kern::default_policy());
        const Modulus& mod = ctx.modulus(0);
        const uint64_t* s0 = sk.s.block(0);
        for (size_t i = 0; i < n; ++i) t[i] = mod.mul(t[i], s0[i]);
        kern::ntt_inverse_units({&unit, 1}, kern::default_policy());

        const uint64_t* c0 = c.comps[0].block(0);
        const uint64_t q0 = mod.value;
        std::vector<int64_t> m(n);
        for (size_t i = 0; i < n; ++i) {
            uint64_t v = add_mod(c0[i], t[i], q0);
            m[i] = v > q0 / 2 ? int64_t(v - q0) : int64_t(v);
        }
        std::vector<double> out(params().slot_count);
        codec_.decode(m, c.scale, out);
        return out;
    }

    Ciphertext add(const Ciphertext& a, const Ciphertext& b) const override { return add_sub(a, b, false); }
    Ciphertext sub(const Ciphertext& a, const Ciphertext& b) const override { return add_sub(a, b, true); }

    Ciphertext add_plain(const Ciphertext& a, const Plaintext& p) const override {
        detail::check_ciphertext(*ctx_, kind_, a, "ciphertext");
        detail::check_plaintext(*ctx_, kind_, p, "plaintext");
        detail::check_same_level(a.level, p.level);
        detail::check_same_scale(a.scale, p.scale);
        Ciphertext out = a;
        kern::add(*ctx_, out.comps[0], p.poly, out.comps[0], kern::default_policy());
        return out;
    }

    Ciphertext mul_plain(const Ciphertext& a, const Plaintext& p) const override {
        detail::check_ciphertext(*ctx_, kind_, a, "ciphertext");
        detail::check_plaintext(*ctx_, kind_, p, "plaintext");
        detail::check_same_level(a.level, p.level);
        detail::check_mul_depth(a.level);
        const RingContext& ctx = *ctx_;

        Ciphertext out = a;
        RnsPoly pt = p.poly;
        kern::ntt_forward(ctx, pt, kern::default_policy());
        for (auto& comp : out.comps) {
            kern::ntt_forward(ctx, comp, kern::default_policy());
            kern::mul(ctx, comp, pt, comp, kern::default_policy());
            kern::ntt_inverse(ctx, comp, kern::default_policy());
        }
        rescale_inplace(out, a.scale * p.scale);
        return out;
    }

    Ciphertext mul(const Ciphertext& a, const Ciphertext& b, const RelinKey& rk) const override {
        detail::check_ciphertext(*ctx_, kind_, a, "left operand");
        detail::check_ciphertext(*ctx_, kind_, b, "right operand");
        detail::check_same_level(a.level, b.level);
        detail::check_same_scale(a.scale, b.scale);
        detail::check_mul_depth(a.level);
        detail::check_digest(rk.params_digest, ctx_->params_digest(), "relinearization key");
        if (rk.key.empty()) throw KeyError("relinearization key missing");
        const RingContext& ctx = *ctx_;
        size_t n = ctx.n();
        Basis basis = ctx.level_basis(a.level);

        RnsPoly a0 = a.comps[0], a1 = a.comps[1], b0 = b.comps[0], b1 = b.comps[1];
        {
            std::vector<kern::NttUnit> units;
            for (RnsPoly* p : {&a0, &a1, &b0, &b1})
                for (size_t s = 0; s < basis.count(); ++s) units.push_back({p->block(s), &ctx.tables(s)});
            kern::ntt_forward_units(units, kern::default_policy());
        }

        RnsPoly d0(n, basis), d1(n, basis), d2(n, basis);
        kern::mul(ctx, a0, b0, d0, kern::default_policy());
        kern::mul(ctx, a0, b1, d1, kern::default_policy());
        kern::mac(ctx, a1, b0, d1, kern::default_policy());
        kern::mul(ctx, a1, b1, d2, kern::default_policy());
        kern::ntt_inverse(ctx, d0, kern::default_policy());
        kern::ntt_inverse(ctx, d1, kern::default_policy());
        kern::ntt_inverse(ctx, d2, kern::default_policy());

        auto [k0, k1] = key_switch(d2, rk.key, a.level);
        Ciphertext out;
        out.backend = BackendKind::lattice;
        out.params_digest = ctx.params_digest();
        out.level = a.level;
        out.comps.resize(2);
        kern::add(ctx, d0, k0, out.comps[0], kern::default_policy());
        kern::add(ctx, d1, k1, out.comps[1], kern::default_policy());
        rescale_inplace(out, a.scale * b.scale);
        return out;
    }

    Ciphertext rotate(const Ciphertext& a, int steps, const GaloisKeys& gk) const override {
        detail::check_ciphertext(*ctx_, kind_, a, "ciphertext");
        detail::check_digest(gk.params_digest, ctx_->params_digest(), "rotation keys");
        int64_t slots = params().slot_count;
        int64_t m = int64_t(steps) % slots;
        if (m < 0) m += slots;
        uint32_t r = uint32_t(m);
        Ciphertext cur = a;
        for (size_t t = 0; r != 0; ++t, r >>= 1) {
            if ((r & 1) == 0) continue;
            if (t >= ctx_->rotation_element_count()) throw KeyError("rotation step outside supported range");
            auto it = gk.by_step.find(uint32_t(1) << t);
            if (it == gk.by_step.end() || it->second.empty())
                throw KeyError("rotation key for step " + std::to_string(uint32_t(1) << t) + " missing");
            cur = rotate_pow2(cur, uint32_t(t), it->second);
        }
        return cur;
    }

private:
    Ciphertext add_sub(const Ciphertext& a, const Ciphertext& b, bool negate_b) const {
        detail::check_ciphertext(*ctx_, kind_, a, "left operand");
        detail::check_ciphertext(*ctx_, kind_, b, "right operand");
        detail::check_same_level(a.level, b.level);
        detail::check_same_scale(a.scale, b.scale);
        Ciphertext out = a;
        for (size_t i = 0; i < 2; ++i) {
            if (negate_b)
                kern::sub(*ctx_, a.comps[i], b.comps[i], out.comps[i], kern::default_policy());
            else
                kern::add(*ctx_, a.comps[i], b.comps[i], out.comps[i], kern::default_policy());
        }
        return out;
    }

    // Divides both components by the level's top prime (round-to-nearest via
    // centered remainder) and drops that block.
    void rescale_inplace(Ciphertext& c, double raw_scale) const {
        const RingContext& ctx = *ctx_;
        int lvl = c.level;
        std::vector<uint64_t> inv(static_cast<size_t>(lvl), 0);
        for (size_t j = 0; j < size_t(lvl); ++j) inv[j] = ctx.dropped_prime_inv(lvl, j);
        for (auto& comp : c.comps) {
            RnsPoly dropped(ctx.n(), ctx.level_basis(lvl - 1));
            kern::div_drop_block(ctx, comp, size_t(lvl), size_t(lvl), inv, dropped, kern::default_policy());
            comp = std::move(dropped);
        }
        c.level = lvl - 1;
        c.scale = raw_scale / double(ctx.prime(size_t(lvl)));
    }

    // Hybrid switch: decompose t digit-wise by data prime, extend each digit
    // to the level basis plus the switching prime, accumulate against the key
    // in the transform domain, then scale the switching prime back out.
    std::pair<RnsPoly, RnsPoly> key_switch(const RnsPoly& t, const SwitchKey& key, int level) const {
        const RingContext& ctx = *ctx_;
        size_t n = ctx.n();
        size_t k = size_t(level) + 1;
        size_t special_index = ctx.data_prime_count();
        Basis ext{k, true};

        RnsPoly acc0(n, ext), acc1(n, ext), digit(n, ext);
        for (size_t j = 0; j < k; ++j) {
            kern::spread_residue(ctx, t.block(j), j, digit, kern::default_policy());
            kern::ntt_forward(ctx, digit, kern::default_policy());
            std::vector<kern::MulUnit> units;
            for (size_t s = 0; s <= k; ++s) {
                size_t pi = s < k ? s : special_index;
                size_t key_slot = s < k ? s : ctx.data_prime_count();
                const Modulus* mod = &ctx.modulus(pi);
                units.push_back({digit.block(s), key.b[j].block(key_slot), acc0.block(s), mod});
                units.push_back({digit.block(s), key.a[j].block(key_slot), acc1.block(s), mod});
            }
            kern::mac_units(units, n, kern::default_policy());
        }
        kern::ntt_inverse(ctx, acc0, kern::default_policy());
        kern::ntt_inverse(ctx, acc1, kern::default_policy());

        std::vector<uint64_t> inv(k);
        for (size_t j = 0; j < k; ++j) inv[j] = ctx.special_inv_mod(j);
        RnsPoly out0(n, Basis{k, false}), out1(n, Basis{k, false});
        kern::div_drop_block(ctx, acc0, k, special_index, inv, out0, kern::default_policy());
        kern::div_drop_block(ctx, acc1, k, special_index, inv, out1, kern::default_policy());
        return {std::move(out0), std::move(out1)};
    }

    Ciphertext rotate_pow2(const Ciphertext& c, uint32_t pow2_index, const SwitchKey& key) const {
        const RingContext& ctx = *ctx_;
        uint32_t g = ctx.rotation_element(pow2_index);
        RnsPoly r0(ctx.n(), c.comps[0].basis), r1(ctx.n(), c.comps[1].basis);
        kern::automorphism(ctx, c.comps[0], g, r0, kern::default_policy());
        kern::automorphism(ctx, c.comps[1], g, r1, kern::default_policy());
        auto [k0, k1] = key_switch(r1, key, c.level);
        Ciphertext out;
        out.backend = BackendKind::lattice;
        out.params_digest = ctx.params_digest();
        out.level = c.level;
        out.scale = c.scale;
        out.comps.resize(2);
        kern::add(ctx, r0, k0, out.comps[0], kern::default_policy());
        out.comps[1] = std::move(k1);
        return out;
    }

    // b_j = -a_j*s + e_j, plus P*target folded into block j only: the CRT
    // element for prime j vanishes everywhere else, and P*crt_j mod P is 0,
    // so the level basis never enters key generation.
    SwitchKey make_switch_key(std::mt19937_64& rng, const RnsPoly& s, const RnsPoly& target_ntt) const {
        const RingContext& ctx = *ctx_;
        size_t n = ctx.n();
        size_t K = ctx.data_prime_count();
        Basis full{K, true};
        SwitchKey key;
        key.a.resize(K);
        key.b.resize(K);
        for (size_t j = 0; j < K; ++j) {
            key.a[j] = RnsPoly(n, full);
            sample_uniform_poly(rng, ctx, key.a[j]);
            RnsPoly e = signed_to_rns<int64_t>(ctx, sample_error(rng, n), full);
            kern::ntt_forward(ctx, e, kern::default_policy());
            RnsPoly as(n, full);
            kern::mul(ctx, key.a[j], s, as, kern::default_policy());
            kern::negate(ctx, as, kern::default_policy());
            kern::add(ctx, as, e, key.b[j], kern::default_policy());

            const Modulus& mod = ctx.modulus(j);
            uint64_t p_red = ctx.special_mod(j);
            uint64_t p_quo = shoup_precompute(p_red, mod.value);
            uint64_t* bj = key.b[j].block(j);
            const uint64_t* tj = target_ntt.block(j);
            for (size_t i = 0; i < n; ++i)
                bj[i] = add_mod(bj[i], mul_shoup(tj[i], p_red, p_quo, mod.value), mod.value);
        }
        return key;
    }

    std::vector<int64_t> centered_block0(const RnsPoly& p) const {
        const uint64_t q0 = ctx_->prime(0);
        std::vector<int64_t> out(p.n);
        const uint64_t* blk = p.block(0);
        for (size_t i = 0; i < p.n; ++i)
            out[i] = blk[i] > q0 / 2 ? int64_t(blk[i] - q0) : int64_t(blk[i]);
        return out;
    }

    SlotCodec codec_;
};

std::unique_ptr<SlotBackend> make_lattice_backend(std::shared_ptr<const RingContext> ctx) {
    return std::make_unique<LatticeBackend>(std::move(ctx));
}

} // namespace hematch::he
