#include "hematch/he/kernels.hpp"

#include <atomic>

#include "hematch/common/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hematch::he::kern {

namespace {

std::atomic<Policy> g_default_policy{
#ifdef _OPENMP
    Policy::parallel
#else
    Policy::serial
#endif
};

// Merged negacyclic forward transform (Cooley-Tukey, scaled root powers in
// bit-reversed order).  Natural-order input, scrambled-order output; the
// inverse consumes the scrambled order directly, so no explicit reversal pass
// exists anywhere.
void ntt_forward_block(uint64_t* a, const PrimeTables& t, size_t n) {
    const uint64_t q = t.mod.value;
    size_t half = n;
    for (size_t m = 1; m < n; m <<= 1) {
        half >>= 1;
        for (size_t i = 0; i < m; ++i) {
            size_t j1 = 2 * i * half;
            uint64_t w = t.root_br[m + i];
            uint64_t wq = t.root_br_quo[m + i];
            for (size_t j = j1; j < j1 + half; ++j) {
                uint64_t u = a[j];
                uint64_t v = mul_shoup(a[j + half], w, wq, q);
                a[j] = add_mod(u, v, q);
                a[j + half] = sub_mod(u, v, q);
            }
        }
    }
}

void ntt_inverse_block(uint64_t* a, const PrimeTables& t, size_t n) {
    const uint64_t q = t.mod.value;
    size_t half = 1;
    for (size_t m = n; m > 1; m >>= 1) {
        size_t j1 = 0;
        size_t groups = m >> 1;
        for (size_t i = 0; i < groups; ++i) {
            uint64_t w = t.root_inv_br[groups + i];
            uint64_t wq = t.root_inv_br_quo[groups + i];
            for (size_t j = j1; j < j1 + half; ++j) {
                uint64_t u = a[j];
                uint64_t v = a[j + half];
                a[j] = add_mod(u, v, q);
                a[j + half] = mul_shoup(sub_mod(u, v, q), w, wq, q);
            }
            j1 += 2 * half;
        }
        half <<= 1;
    }
    for (size_t i = 0; i < n; ++i) a[i] = mul_shoup(a[i], t.n_inv, t.n_inv_quo, q);
}

template <typename Fn>
void run_units(size_t count, Policy policy, Fn&& fn) {
    if (policy == Policy::parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
        for (long i = 0; i < long(count); ++i) fn(size_t(i));
        return;
#endif
    }
    for (size_t i = 0; i < count; ++i) fn(i);
}

void check_same_shape(const RnsPoly& a, const RnsPoly& b) {
    if (a.n != b.n || !(a.basis == b.basis)) throw ParamError("kernel operands have mismatched shapes");
}

} // namespace

Policy default_policy() { return g_default_policy.load(); }
void set_default_policy(Policy p) { g_default_policy.store(p); }

size_t prime_index_of(const RingContext& ctx, const Basis& basis, size_t slot) {
    return slot < basis.data_primes ? slot : ctx.data_prime_count();
}

void ntt_forward_units(std::span<const NttUnit> units, Policy policy) {
    if (units.empty()) return;
    size_t n = units[0].tables->root_br.size();
    run_units(units.size(), policy, [&](size_t i) { ntt_forward_block(units[i].data, *units[i].tables, n); });
}

void ntt_inverse_units(std::span<const NttUnit> units, Policy policy) {
    if (units.empty()) return;
    size_t n = units[0].tables->root_br.size();
    run_units(units.size(), policy, [&](size_t i) { ntt_inverse_block(units[i].data, *units[i].tables, n); });
}

namespace {

std::vector<NttUnit> poly_units(const RingContext& ctx, RnsPoly& a) {
    std::vector<NttUnit> units;
    units.reserve(a.basis.count());
    for (size_t s = 0; s < a.basis.count(); ++s)
        units.push_back({a.block(s), &ctx.tables(prime_index_of(ctx, a.basis, s))});
    return units;
}

} // namespace

void ntt_forward(const RingContext& ctx, RnsPoly& a, Policy policy) {
    auto units = poly_units(ctx, a);
    ntt_forward_units(units, policy);
}

void ntt_inverse(const RingContext& ctx, RnsPoly& a, Policy policy) {
    auto units = poly_units(ctx, a);
    ntt_inverse_units(units, policy);
}

namespace {

enum class BinOp { add, sub, mul, mac };

template <BinOp op>
void binary_block(const Modulus& mod, const uint64_t* a, const uint64_t* b, uint64_t* out, size_t n) {
    const uint64_t q = mod.value;
    for (size_t i = 0; i < n; ++i) {
        if constexpr (op == BinOp::add)
            out[i] = add_mod(a[i], b[i], q);
        else if constexpr (op == BinOp::sub)
            out[i] = sub_mod(a[i], b[i], q);
        else if constexpr (op == BinOp::mul)
            out[i] = mod.mul(a[i], b[i]);
        else
            out[i] = add_mod(out[i], mod.mul(a[i], b[i]), q);
    }
}

template <BinOp op>
void binary_dispatch(const RingContext& ctx, const RnsPoly& a, const RnsPoly& b, RnsPoly& out,
                     Policy policy) {
    check_same_shape(a, b);
    if (out.n != a.n || !(out.basis == a.basis)) out = RnsPoly(a.n, a.basis);
    run_units(a.basis.count(), policy, [&](size_t s) {
        const Modulus& mod = ctx.modulus(prime_index_of(ctx, a.basis, s));
        binary_block<op>(mod, a.block(s), b.block(s), out.block(s), a.n);
    });
}

} // namespace

void mul_units(std::span<const MulUnit> units, size_t n, Policy policy) {
    run_units(units.size(), policy, [&](size_t i) {
        const MulUnit& u = units[i];
        binary_block<BinOp::mul>(*u.mod, u.a, u.b, u.out, n);
    });
}

void mac_units(std::span<const MulUnit> units, size_t n, Policy policy) {
    run_units(units.size(), policy, [&](size_t i) {
        const MulUnit& u = units[i];
        binary_block<BinOp::mac>(*u.mod, u.a, u.b, u.out, n);
    });
}

void add(const RingContext& ctx, const RnsPoly& a, const RnsPoly& b, RnsPoly& out, Policy policy) {
    binary_dispatch<BinOp::add>(ctx, a, b, out, policy);
}

void sub(const RingContext& ctx, const RnsPoly& a, const RnsPoly& b, RnsPoly& out, Policy policy) {
    binary_dispatch<BinOp::sub>(ctx, a, b, out, policy);
}

void mul(const RingContext& ctx, const RnsPoly& a, const RnsPoly& b, RnsPoly& out, Policy policy) {
    binary_dispatch<BinOp::mul>(ctx, a, b, out, policy);
}

void mac(const RingContext& ctx, const RnsPoly& a, const RnsPoly& b, RnsPoly& acc, Policy policy) {
    check_same_shape(a, b);
    check_same_shape(a, acc);
    binary_dispatch<BinOp::mac>(ctx, a, b, acc, policy);
}

void negate(const RingContext& ctx, RnsPoly& a, Policy policy) {
    run_units(a.basis.count(), policy, [&](size_t s) {
        const uint64_t q = ctx.modulus(prime_index_of(ctx, a.basis, s)).value;
        uint64_t* blk = a.block(s);
        for (size_t i = 0; i < a.n; ++i) blk[i] = neg_mod(blk[i], q);
    });
}

void automorphism(const RingContext& ctx, const RnsPoly& a, uint32_t galois_element, RnsPoly& out,
                  Policy policy) {
    const auto& map = ctx.automorphism_map(galois_element);
    if (&out == &a) throw ParamError("automorphism cannot run in place");
    if (out.n != a.n || !(out.basis == a.basis)) out = RnsPoly(a.n, a.basis);
    run_units(a.basis.count(), policy, [&](size_t s) {
        const uint64_t q = ctx.modulus(prime_index_of(ctx, a.basis, s)).value;
        const uint64_t* src = a.block(s);
        uint64_t* dst = out.block(s);
        for (size_t i = 0; i < a.n; ++i) {
            uint32_t entry = map[i];
            uint64_t v = src[i];
            if (entry & RingContext::auto_negate_bit) v = neg_mod(v, q);
            dst[entry & ~RingContext::auto_negate_bit] = v;
        }
    });
}

void spread_residue(const RingContext& ctx, const uint64_t* src, size_t src_prime_index, RnsPoly& dst,
                    Policy policy) {
    run_units(dst.basis.count(), policy, [&](size_t s) {
        size_t pi = prime_index_of(ctx, dst.basis, s);
        uint64_t* out = dst.block(s);
        if (pi == src_prime_index) {
            for (size_t i = 0; i < dst.n; ++i) out[i] = src[i];
            return;
        }
        const Modulus& mod = ctx.modulus(pi);
        if (ctx.prime(src_prime_index) < mod.value) {
            for (size_t i = 0; i < dst.n; ++i) out[i] = src[i];
        } else {
            for (size_t i = 0; i < dst.n; ++i) out[i] = mod.reduce64(src[i]);
        }
    });
}

void div_drop_block(const RingContext& ctx, const RnsPoly& in, size_t div_slot, size_t div_prime_index,
                    std::span<const uint64_t> div_inv_per_block, RnsPoly& out, Policy policy) {
    const uint64_t qd = ctx.prime(div_prime_index);
    const uint64_t half = qd >> 1;
    if (out.basis.count() != in.basis.count() - 1 || out.n != in.n)
        throw ParamError("div_drop_block output shape mismatch");
    const uint64_t* div_blk = in.block(div_slot);
    run_units(out.basis.count(), policy, [&](size_t s) {
        size_t in_slot = s < div_slot ? s : s + 1;
        size_t pi = prime_index_of(ctx, out.basis, s);
        const Modulus& mod = ctx.modulus(pi);
        const uint64_t q = mod.value;
        const uint64_t qd_red = mod.reduce64(qd); // divisor prime may exceed this block's prime
        const uint64_t inv = div_inv_per_block[s];
        const uint64_t* src = in.block(in_slot);
        uint64_t* dst = out.block(s);
        for (size_t i = 0; i < in.n; ++i) {
            uint64_t v = div_blk[i];
            uint64_t r = v < q ? v : mod.reduce64(v);
            // centered remainder: values above qd/2 represent negatives
            if (v > half) r = sub_mod(r, qd_red, q);
            uint64_t diff = sub_mod(src[i], r, q);
            dst[i] = mod.mul(diff, inv);
        }
    });
}

} // namespace hematch::he::kern
