#include "hematch/he/serialize.hpp"

#include <cmath>
#include <cstring>

#include "hematch/common/binio.hpp"
#include "hematch/common/errors.hpp"

namespace hematch::he {

namespace {

constexpr uint32_t format_version = 1;

constexpr char magic_ciphertext[9] = "HMCIPHTX";
constexpr char magic_secret[9] = "HMSECKEY";
constexpr char magic_public[9] = "HMPUBKEY";
constexpr char magic_relin[9] = "HMRLNKEY";
constexpr char magic_galois[9] = "HMGALKEY";

void put_header(ByteWriter& w, const char* magic, uint64_t digest, BackendKind backend) {
    w.bytes(std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(magic), 8));
    w.u32_le(format_version);
    w.u64_le(digest);
    w.u8(uint8_t(backend));
}

BackendKind read_header(ByteReader& r, const char* magic, const RingContext& ctx) {
    auto m = r.bytes(8);
    if (std::memcmp(m.data(), magic, 8) != 0) throw FormatError("container magic mismatch");
    uint32_t version = r.u32_le();
    if (version != format_version)
        throw FormatError("unsupported container version " + std::to_string(version));
    uint64_t digest = r.u64_le();
    if (digest != ctx.params_digest())
        throw KeyError("container params digest mismatch: produced under a different parameter set");
    uint8_t b = r.u8();
    if (b > uint8_t(BackendKind::clear)) throw FormatError("unknown backend tag");
    return BackendKind(b);
}

void put_poly(ByteWriter& w, const RnsPoly& p) {
    w.u32_le(uint32_t(p.basis.data_primes));
    w.u8(p.basis.special ? 1 : 0);
    w.u32_le(uint32_t(p.n));
    for (uint64_t v : p.data) w.u64_le(v);
}

RnsPoly read_poly(ByteReader& r, const RingContext& ctx) {
    Basis basis;
    basis.data_primes = r.u32_le();
    basis.special = r.u8() != 0;
    size_t n = r.u32_le();
    if (n != ctx.n()) throw FormatError("polynomial length does not match parameter set");
    if (basis.data_primes > ctx.data_prime_count()) throw FormatError("residue basis exceeds prime chain");
    RnsPoly p(n, basis);
    for (auto& v : p.data) v = r.u64_le();
    for (size_t s = 0; s < basis.count(); ++s) {
        uint64_t q = ctx.prime(s < basis.data_primes ? s : ctx.data_prime_count());
        const uint64_t* blk = p.block(s);
        for (size_t i = 0; i < n; ++i)
            if (blk[i] >= q) throw FormatError("residue out of range for its modulus");
    }
    return p;
}

void put_slots(ByteWriter& w, const std::vector<double>& slots) {
    w.u32_le(uint32_t(slots.size()));
    for (double v : slots) w.f64_le(v);
}

std::vector<double> read_slots(ByteReader& r, const RingContext& ctx) {
    size_t count = r.u32_le();
    if (count != ctx.params().slot_count) throw FormatError("slot count does not match parameter set");
    std::vector<double> out(count);
    for (auto& v : out) v = r.f64_le();
    return out;
}

void put_switch_key(ByteWriter& w, const SwitchKey& k) {
    w.u32_le(uint32_t(k.b.size()));
    for (size_t j = 0; j < k.b.size(); ++j) {
        put_poly(w, k.b[j]);
        put_poly(w, k.a[j]);
    }
}

SwitchKey read_switch_key(ByteReader& r, const RingContext& ctx) {
    SwitchKey k;
    size_t count = r.u32_le();
    if (count > ctx.data_prime_count()) throw FormatError("switch key component count exceeds prime chain");
    k.b.reserve(count);
    k.a.reserve(count);
    for (size_t j = 0; j < count; ++j) {
        k.b.push_back(read_poly(r, ctx));
        k.a.push_back(read_poly(r, ctx));
    }
    return k;
}

void expect_done(ByteReader& r) {
    if (!r.done()) throw FormatError("trailing bytes after container payload");
}

} // namespace

std::vector<uint8_t> serialize_ciphertext(const Ciphertext& c) {
    ByteWriter w;
    put_header(w, magic_ciphertext, c.params_digest, c.backend);
    w.u32_le(uint32_t(c.level));
    w.f64_le(c.scale);
    w.u64_le(c.key_tag);
    w.u64_le(c.nonce);
    if (c.backend == BackendKind::lattice) {
        w.u32_le(uint32_t(c.comps.size()));
        for (const auto& comp : c.comps) put_poly(w, comp);
    } else {
        w.u32_le(0);
        put_slots(w, c.slots);
    }
    return w.take();
}

Ciphertext deserialize_ciphertext(std::span<const uint8_t> data, const RingContext& ctx) {
    ByteReader r(data);
    Ciphertext c;
    c.backend = read_header(r, magic_ciphertext, ctx);
    c.params_digest = ctx.params_digest();
    c.level = int(r.u32_le());
    if (c.level < 0 || c.level > ctx.params().max_level) throw FormatError("ciphertext level out of range");
    c.scale = r.f64_le();
    if (!(c.scale > 0.0) || !std::isfinite(c.scale)) throw FormatError("ciphertext scale must be positive");
    c.key_tag = r.u64_le();
    c.nonce = r.u64_le();
    uint32_t comps = r.u32_le();
    if (c.backend == BackendKind::lattice) {
        if (comps != 2) throw FormatError("ciphertext must carry exactly two components");
        for (uint32_t i = 0; i < comps; ++i) c.comps.push_back(read_poly(r, ctx));
        for (const auto& comp : c.comps)
            if (comp.basis.data_primes != size_t(c.level) + 1 || comp.basis.special)
                throw FormatError("component basis does not match ciphertext level");
    } else {
        if (comps != 0) throw FormatError("clear ciphertext carries no ring components");
        c.slots = read_slots(r, ctx);
    }
    expect_done(r);
    return c;
}

std::vector<uint8_t> serialize_secret_key(const SecretKey& k) {
    ByteWriter w;
    bool lattice = !k.s.data.empty();
    put_header(w, magic_secret, k.params_digest, lattice ? BackendKind::lattice : BackendKind::clear);
    w.u64_le(k.pair_tag);
    if (lattice) {
        put_poly(w, k.s);
        w.u32_le(uint32_t(k.s_raw.size()));
        w.bytes(std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(k.s_raw.data()), k.s_raw.size()));
    }
    return w.take();
}

SecretKey deserialize_secret_key(std::span<const uint8_t> data, const RingContext& ctx) {
    ByteReader r(data);
    SecretKey k;
    BackendKind backend = read_header(r, magic_secret, ctx);
    k.params_digest = ctx.params_digest();
    k.pair_tag = r.u64_le();
    if (backend == BackendKind::lattice) {
        k.s = read_poly(r, ctx);
        size_t raw = r.u32_le();
        if (raw != ctx.n()) throw FormatError("secret coefficient vector length mismatch");
        auto bytes = r.bytes(raw);
        k.s_raw.resize(raw);
        std::memcpy(k.s_raw.data(), bytes.data(), raw);
        for (int8_t v : k.s_raw)
            if (v < -1 || v > 1) throw FormatError("secret coefficients must be ternary");
    }
    expect_done(r);
    return k;
}

std::vector<uint8_t> serialize_public_key(const PublicKey& k) {
    ByteWriter w;
    bool lattice = !k.b.data.empty();
    put_header(w, magic_public, k.params_digest, lattice ? BackendKind::lattice : BackendKind::clear);
    w.u64_le(k.pair_tag);
    if (lattice) {
        put_poly(w, k.b);
        put_poly(w, k.a);
    }
    return w.take();
}

PublicKey deserialize_public_key(std::span<const uint8_t> data, const RingContext& ctx) {
    ByteReader r(data);
    PublicKey k;
    BackendKind backend = read_header(r, magic_public, ctx);
    k.params_digest = ctx.params_digest();
    k.pair_tag = r.u64_le();
    if (backend == BackendKind::lattice) {
        k.b = read_poly(r, ctx);
        k.a = read_poly(r, ctx);
    }
    expect_done(r);
    return k;
}

std::vector<uint8_t> serialize_relin_key(const RelinKey& k) {
    ByteWriter w;
    bool lattice = !k.key.empty();
    put_header(w, magic_relin, k.params_digest, lattice ? BackendKind::lattice : BackendKind::clear);
    put_switch_key(w, k.key);
    return w.take();
}

RelinKey deserialize_relin_key(std::span<const uint8_t> data, const RingContext& ctx) {
    ByteReader r(data);
    RelinKey k;
    read_header(r, magic_relin, ctx);
    k.params_digest = ctx.params_digest();
    k.key = read_switch_key(r, ctx);
    expect_done(r);
    return k;
}

std::vector<uint8_t> serialize_galois_keys(const GaloisKeys& k) {
    ByteWriter w;
    bool lattice = !k.by_step.empty() && !k.by_step.begin()->second.empty();
    put_header(w, magic_galois, k.params_digest, lattice ? BackendKind::lattice : BackendKind::clear);
    w.u32_le(uint32_t(k.by_step.size()));
    for (const auto& [step, key] : k.by_step) {
        w.u32_le(step);
        put_switch_key(w, key);
    }
    return w.take();
}

GaloisKeys deserialize_galois_keys(std::span<const uint8_t> data, const RingContext& ctx) {
    ByteReader r(data);
    GaloisKeys k;
    read_header(r, magic_galois, ctx);
    k.params_digest = ctx.params_digest();
    uint32_t count = r.u32_le();
    if (count > 64) throw FormatError("rotation key count implausibly large");
    for (uint32_t i = 0; i < count; ++i) {
        uint32_t step = r.u32_le();
        if (k.by_step.count(step)) throw FormatError("duplicate rotation step in key container");
        k.by_step.emplace(step, read_switch_key(r, ctx));
    }
    expect_done(r);
    return k;
}

} // namespace hematch::he
