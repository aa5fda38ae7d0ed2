#include <doctest.h>

#include <cmath>
#include <random>

#include "hematch/common/errors.hpp"
#include "hematch/he/backend.hpp"
#include "hematch/he/serialize.hpp"

using namespace hematch;
using namespace hematch::he;

namespace {

struct Fixture {
    HeParams params = HeParams::test_profile();
    std::unique_ptr<SlotBackend> backend = SlotBackend::create(params, BackendKind::lattice);
    KeyBundle keys = backend->keygen(311);
};

Fixture& fx() {
    static Fixture f;
    return f;
}

std::vector<double> random_slots(std::mt19937_64& rng, size_t count) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> out(count);
    for (auto& v : out) v = dist(rng);
    return out;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0;
    for (size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::fabs(a[i] - b[i]));
    return worst;
}

Ciphertext enc(Fixture& f, const std::vector<double>& v) {
    return f.backend->encrypt(f.backend->encode(v, f.params.max_level, f.params.scale()),
                              f.keys.eval.public_key);
}

} // namespace

TEST_SUITE("serialize") {

TEST_CASE("ciphertext container round-trips and still decrypts") {
    auto& f = fx();
    std::mt19937_64 rng(71);
    auto v = random_slots(rng, f.params.slot_count);
    auto ct = enc(f, v);

    auto bytes = serialize_ciphertext(ct);
    auto back = deserialize_ciphertext(bytes, *f.backend->context());
    CHECK(back.level == ct.level);
    CHECK(back.scale == ct.scale);
    CHECK(back.comps == ct.comps);
    CHECK(max_abs_diff(f.backend->decrypt(back, f.keys.secret), v) < 1e-6);
}

TEST_CASE("key containers round-trip and the restored bundle is usable") {
    auto& f = fx();
    const auto& ctx = *f.backend->context();

    auto sk = deserialize_secret_key(serialize_secret_key(f.keys.secret), ctx);
    CHECK(sk.s == f.keys.secret.s);
    CHECK(sk.s_raw == f.keys.secret.s_raw);
    CHECK(sk.pair_tag == f.keys.secret.pair_tag);

    auto pk = deserialize_public_key(serialize_public_key(f.keys.eval.public_key), ctx);
    CHECK(pk.b == f.keys.eval.public_key.b);
    CHECK(pk.a == f.keys.eval.public_key.a);

    auto rk = deserialize_relin_key(serialize_relin_key(f.keys.eval.relin), ctx);
    CHECK(rk.key.b == f.keys.eval.relin.key.b);
    CHECK(rk.key.a == f.keys.eval.relin.key.a);

    auto gk = deserialize_galois_keys(serialize_galois_keys(f.keys.eval.galois), ctx);
    REQUIRE(gk.by_step.size() == f.keys.eval.galois.by_step.size());
    for (const auto& [step, key] : f.keys.eval.galois.by_step) {
        auto it = gk.by_step.find(step);
        REQUIRE(it != gk.by_step.end());
        CHECK(it->second.b == key.b);
    }

    // Restored material drives a full multiply+rotate+decrypt chain.
    std::mt19937_64 rng(72);
    auto v = random_slots(rng, f.params.slot_count);
    auto ct = f.backend->encrypt(f.backend->encode(v, f.params.max_level, f.params.scale()), pk);
    auto sq = f.backend->mul(ct, ct, rk);
    auto rot = f.backend->rotate(sq, 3, gk);
    auto got = f.backend->decrypt(rot, sk);
    std::vector<double> want(f.params.slot_count);
    for (size_t i = 0; i < want.size(); ++i) {
        double x = v[(i + 3) % v.size()];
        want[i] = x * x;
    }
    CHECK(max_abs_diff(got, want) < 1e-3);
}

TEST_CASE("clear-backend ciphertext round-trips exactly") {
    auto backend = SlotBackend::create(HeParams::test_profile(), BackendKind::clear);
    auto keys = backend->keygen(5);
    std::mt19937_64 rng(73);
    auto v = random_slots(rng, backend->params().slot_count);
    auto ct = backend->encrypt(backend->encode(v, backend->params().max_level, backend->params().scale()),
                               keys.eval.public_key);

    auto back = deserialize_ciphertext(serialize_ciphertext(ct), *backend->context());
    CHECK(back.slots == ct.slots);
    CHECK(back.nonce == ct.nonce);
    CHECK(back.key_tag == ct.key_tag);
    CHECK(backend->decrypt(back, keys.secret) == v);
}

TEST_CASE("repeated encryption serializes differently but decrypts identically") {
    auto& f = fx();
    std::mt19937_64 rng(74);
    auto v = random_slots(rng, f.params.slot_count);
    auto b1 = serialize_ciphertext(enc(f, v));
    auto b2 = serialize_ciphertext(enc(f, v));
    CHECK(b1 != b2);
    CHECK(max_abs_diff(f.backend->decrypt(deserialize_ciphertext(b1, *f.backend->context()), f.keys.secret),
                       f.backend->decrypt(deserialize_ciphertext(b2, *f.backend->context()), f.keys.secret))
          < 1e-5);
}

TEST_CASE("corrupted magic is rejected as a format error") {
    auto& f = fx();
    std::mt19937_64 rng(75);
    auto bytes = serialize_ciphertext(enc(f, random_slots(rng, f.params.slot_count)));
    bytes[0] ^= 0xff;
    CHECK_THROWS_AS(deserialize_ciphertext(bytes, *f.backend->context()), FormatError);
}

TEST_CASE("unknown format version is rejected") {
    auto& f = fx();
    std::mt19937_64 rng(76);
    auto bytes = serialize_ciphertext(enc(f, random_slots(rng, f.params.slot_count)));
    bytes[8] = 0x7f; // version field follows the 8-byte magic
    CHECK_THROWS_AS(deserialize_ciphertext(bytes, *f.backend->context()), FormatError);
}

TEST_CASE("truncated containers are rejected at any cut point") {
    auto& f = fx();
    std::mt19937_64 rng(77);
    auto bytes = serialize_ciphertext(enc(f, random_slots(rng, f.params.slot_count)));
    for (size_t keep : {size_t(0), size_t(4), size_t(12), size_t(21), bytes.size() / 2, bytes.size() - 1}) {
        std::vector<uint8_t> cut(bytes.begin(), bytes.begin() + keep);
        CHECK_THROWS_AS(deserialize_ciphertext(cut, *f.backend->context()), FormatError);
    }
    CHECK_THROWS_AS(deserialize_secret_key({bytes.data(), size_t(9)}, *f.backend->context()),
                    FormatError);
}

TEST_CASE("trailing garbage is rejected") {
    auto& f = fx();
    std::mt19937_64 rng(78);
    auto bytes = serialize_ciphertext(enc(f, random_slots(rng, f.params.slot_count)));
    bytes.push_back(0);
    CHECK_THROWS_AS(deserialize_ciphertext(bytes, *f.backend->context()), FormatError);
}

TEST_CASE("containers from other parameter sets are rejected before any math") {
    auto& f = fx();
    auto other = SlotBackend::create(
        HeParams::custom(8192, {60, 40, 40, 40, 60}, f.params.scale_bits), BackendKind::lattice);
    std::mt19937_64 rng(79);
    auto bytes = serialize_ciphertext(enc(f, random_slots(rng, f.params.slot_count)));
    CHECK_THROWS_AS(deserialize_ciphertext(bytes, *other->context()), KeyError);

    auto kb = serialize_secret_key(f.keys.secret);
    CHECK_THROWS_AS(deserialize_secret_key(kb, *other->context()), KeyError);
}

TEST_CASE("container type confusion is rejected") {
    auto& f = fx();
    auto kb = serialize_public_key(f.keys.eval.public_key);
    CHECK_THROWS_AS(deserialize_secret_key(kb, *f.backend->context()), FormatError);
    CHECK_THROWS_AS(deserialize_ciphertext(kb, *f.backend->context()), FormatError);
}

TEST_CASE("serialized ciphertext size grows with remaining depth") {
    // Shape-only check: containers are built directly so no large-ring key
    // generation is needed.
    size_t previous = 0;
    for (int depth = 1; depth <= 5; ++depth) {
        std::vector<int> chain(static_cast<size_t>(depth) + 2, 40);
        chain.front() = 60;
        chain.back() = 60;
        auto params = HeParams::custom(16384, chain, 40);
        RingContext ctx(params, false);

        Ciphertext ct;
        ct.backend = BackendKind::lattice;
        ct.params_digest = ctx.params_digest();
        ct.level = params.max_level;
        ct.scale = params.scale();
        ct.comps.assign(2, RnsPoly(params.poly_degree, ctx.level_basis(params.max_level)));

        auto bytes = serialize_ciphertext(ct);
        CHECK(bytes.size() > previous);
        previous = bytes.size();

        auto back = deserialize_ciphertext(bytes, ctx);
        CHECK(back.level == params.max_level);
    }
}

TEST_CASE("rotation key material outweighs the relin key") {
    auto& f = fx();
    size_t galois_total = serialize_galois_keys(f.keys.eval.galois).size();
    size_t relin_total = serialize_relin_key(f.keys.eval.relin).size();
    CHECK(galois_total > relin_total);
}

} // TEST_SUITE
