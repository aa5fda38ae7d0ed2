#include <doctest.h>

#include <cmath>
#include <random>

#include "hematch/common/errors.hpp"
#include "hematch/he/backend.hpp"

using namespace hematch;
using namespace hematch::he;

namespace {

struct Fixture {
    HeParams params = HeParams::test_profile();
    std::unique_ptr<SlotBackend> backend = SlotBackend::create(params, BackendKind::lattice);
    KeyBundle keys = backend->keygen(42);
};

Fixture& fx() {
    static Fixture f;
    return f;
}

std::vector<double> random_slots(std::mt19937_64& rng, size_t count, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
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

TEST_SUITE("he_core") {

TEST_CASE("fresh encrypt/decrypt round trip is tight") {
    auto& f = fx();
    std::mt19937_64 rng(20);
    auto v = random_slots(rng, f.params.slot_count);
    auto ct = enc(f, v);
    CHECK(ct.level == f.params.max_level);
    CHECK(ct.scale == f.params.scale());
    auto back = f.backend->decrypt(ct, f.keys.secret);
    CHECK(max_abs_diff(back, v) < 1e-6);
}

TEST_CASE("encryption is probabilistic") {
    auto& f = fx();
    std::vector<double> v(f.params.slot_count, 0.5);
    auto a = enc(f, v);
    auto b = enc(f, v);
    CHECK(a.comps[0].data != b.comps[0].data);
    CHECK(max_abs_diff(f.backend->decrypt(a, f.keys.secret), f.backend->decrypt(b, f.keys.secret)) < 1e-6);
}

TEST_CASE("homomorphic add, sub, add_plain over random vectors") {
    auto& f = fx();
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 25; ++trial) {
        auto va = random_slots(rng, f.params.slot_count);
        auto vb = random_slots(rng, f.params.slot_count);
        auto ca = enc(f, va);
        auto cb = enc(f, vb);
        auto pb = f.backend->encode(vb, f.params.max_level, f.params.scale());

        auto sum = f.backend->decrypt(f.backend->add(ca, cb), f.keys.secret);
        auto dif = f.backend->decrypt(f.backend->sub(ca, cb), f.keys.secret);
        auto sump = f.backend->decrypt(f.backend->add_plain(ca, pb), f.keys.secret);
        for (size_t i = 0; i < va.size(); ++i) {
            CHECK(sum[i] == doctest::Approx(va[i] + vb[i]).epsilon(1e-6));
            CHECK(dif[i] == doctest::Approx(va[i] - vb[i]).epsilon(1e-6));
            CHECK(sump[i] == doctest::Approx(va[i] + vb[i]).epsilon(1e-6));
        }
    }
}

TEST_CASE("homomorphic multiply with relinearization and rescale") {
    auto& f = fx();
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 25; ++trial) {
        auto va = random_slots(rng, f.params.slot_count);
        auto vb = random_slots(rng, f.params.slot_count);
        auto ca = enc(f, va);
        auto cb = enc(f, vb);
        auto prod = f.backend->mul(ca, cb, f.keys.eval.relin);
        CHECK(prod.level == f.params.max_level - 1);
        CHECK(std::fabs(prod.scale / f.params.scale() - 1.0) < 1e-4);
        auto got = f.backend->decrypt(prod, f.keys.secret);
        for (size_t i = 0; i < va.size(); ++i)
            CHECK(got[i] == doctest::Approx(va[i] * vb[i]).epsilon(1e-4));
    }
}

TEST_CASE("mul_plain consumes a level and scales by the dropped prime") {
    auto& f = fx();
    std::mt19937_64 rng(23);
    auto va = random_slots(rng, f.params.slot_count);
    auto vb = random_slots(rng, f.params.slot_count);
    auto ca = enc(f, va);
    auto pb = f.backend->encode(vb, f.params.max_level, f.params.scale());
    auto prod = f.backend->mul_plain(ca, pb);
    CHECK(prod.level == f.params.max_level - 1);
    auto got = f.backend->decrypt(prod, f.keys.secret);
    for (size_t i = 0; i < va.size(); ++i)
        CHECK(got[i] == doctest::Approx(va[i] * vb[i]).epsilon(1e-5));
}

TEST_CASE("depth budget: three multiplies pass, the fourth fails deterministically") {
    auto& f = fx();
    std::mt19937_64 rng(24);
    auto v = random_slots(rng, f.params.slot_count, 0.5, 1.0);
    auto ct = enc(f, v);
    std::vector<double> expect(v);
    for (int round = 0; round < 3; ++round) {
        auto p = f.backend->encode(std::vector<double>(f.params.slot_count, 0.9), ct.level, ct.scale);
        ct = f.backend->mul_plain(ct, p);
        for (auto& e : expect) e *= 0.9;
    }
    CHECK(ct.level == 0);
    auto got = f.backend->decrypt(ct, f.keys.secret);
    CHECK(max_abs_diff(got, expect) < 1e-3);

    auto p0 = f.backend->encode(std::vector<double>(f.params.slot_count, 0.9), 0, ct.scale);
    CHECK_THROWS_AS(f.backend->mul_plain(ct, p0), DepthError);
    CHECK_THROWS_AS(f.backend->mul(ct, ct, f.keys.eval.relin), DepthError);
}

TEST_CASE("rotation shifts slots left and composes like the cyclic group") {
    auto& f = fx();
    std::mt19937_64 rng(25);
    auto v = random_slots(rng, f.params.slot_count);
    auto ct = enc(f, v);
    uint32_t slots = f.params.slot_count;

    for (int steps : {1, 2, 16, 5, 127, -1, -16}) {
        auto rot = f.backend->rotate(ct, steps, f.keys.eval.galois);
        auto got = f.backend->decrypt(rot, f.keys.secret);
        int64_t r = ((int64_t(steps) % slots) + slots) % slots;
        double worst = 0;
        for (size_t i = 0; i < slots; ++i)
            worst = std::max(worst, std::fabs(got[i] - v[(i + size_t(r)) % slots]));
        CHECK(worst < 1e-4);
    }

    // group law: rotate(a, r1+r2) == rotate(rotate(a, r1), r2)
    auto lhs = f.backend->decrypt(f.backend->rotate(ct, 21, f.keys.eval.galois), f.keys.secret);
    auto rhs = f.backend->decrypt(
        f.backend->rotate(f.backend->rotate(ct, 13, f.keys.eval.galois), 8, f.keys.eval.galois),
        f.keys.secret);
    CHECK(max_abs_diff(lhs, rhs) < 1e-4);

    // full turn is the identity
    auto turn = f.backend->decrypt(f.backend->rotate(ct, int(slots), f.keys.eval.galois), f.keys.secret);
    CHECK(max_abs_diff(turn, v) < 1e-4);
}

TEST_CASE("missing rotation key raises KeyError") {
    auto& f = fx();
    std::mt19937_64 rng(26);
    auto ct = enc(f, random_slots(rng, f.params.slot_count));
    GaloisKeys partial = f.keys.eval.galois;
    partial.by_step.erase(4);
    CHECK_THROWS_AS(f.backend->rotate(ct, 4, partial), KeyError);
    CHECK_THROWS_AS(f.backend->rotate(ct, 7, partial), KeyError); // needs 4+2+1
    CHECK_NOTHROW(f.backend->rotate(ct, 3, partial));
}

TEST_CASE("missing relinearization key raises KeyError") {
    auto& f = fx();
    std::mt19937_64 rng(27);
    auto ct = enc(f, random_slots(rng, f.params.slot_count));
    RelinKey empty;
    empty.params_digest = f.backend->params_digest();
    CHECK_THROWS_AS(f.backend->mul(ct, ct, empty), KeyError);
}

TEST_CASE("alignment: mismatched levels or scales are rejected") {
    auto& f = fx();
    std::mt19937_64 rng(28);
    auto v = random_slots(rng, f.params.slot_count);
    auto fresh = enc(f, v);
    auto dropped = f.backend->mul_plain(
        fresh, f.backend->encode(v, f.params.max_level, f.params.scale()));
    CHECK_THROWS_AS(f.backend->add(fresh, dropped), AlignmentError);

    // same level, deliberately different scale
    auto p_off = f.backend->encode(v, f.params.max_level, f.params.scale() * 2.0);
    auto odd = f.backend->encrypt(p_off, f.keys.eval.public_key);
    CHECK_THROWS_AS(f.backend->add(fresh, odd), AlignmentError);
    CHECK_THROWS_AS(f.backend->add_plain(fresh, p_off), AlignmentError);
}

TEST_CASE("decrypting with the wrong secret key yields garbage, not the message") {
    auto& f = fx();
    std::mt19937_64 rng(29);
    auto v = random_slots(rng, f.params.slot_count);
    auto ct = enc(f, v);
    auto other = f.backend->keygen(43);
    auto got = f.backend->decrypt(ct, other.secret);
    CHECK(max_abs_diff(got, v) > 0.1);
}

TEST_CASE("params digest mismatches are rejected before any math") {
    auto& f = fx();
    std::mt19937_64 rng(30);
    auto ct = enc(f, random_slots(rng, f.params.slot_count));

    SecretKey alien = f.keys.secret;
    alien.params_digest ^= 1;
    CHECK_THROWS_AS(f.backend->decrypt(ct, alien), KeyError);

    Ciphertext forged = ct;
    forged.params_digest ^= 1;
    CHECK_THROWS_AS(f.backend->decrypt(forged, f.keys.secret), KeyError);
    CHECK_THROWS_AS(f.backend->add(ct, forged), KeyError);
}

TEST_CASE("seeded keygen is deterministic on the test profile") {
    auto& f = fx();
    auto a = f.backend->keygen(7);
    auto b = f.backend->keygen(7);
    CHECK(a.secret.s.data == b.secret.s.data);
    CHECK(a.eval.public_key.b.data == b.eval.public_key.b.data);
    CHECK(a.eval.relin.key.b[0].data == b.eval.relin.key.b[0].data);
    CHECK(a.eval.galois.by_step.at(1).a[0].data == b.eval.galois.by_step.at(1).a[0].data);
    auto c = f.backend->keygen(8);
    CHECK(a.secret.s.data != c.secret.s.data);
}

TEST_CASE("production profile rejects seeded keygen") {
    auto backend = SlotBackend::create(HeParams::production(), BackendKind::lattice);
    CHECK_THROWS_AS(backend->keygen(7), ParamError);
}

TEST_CASE("galois key inventory covers exactly the power-of-two steps") {
    auto& f = fx();
    // slot_count 2048 -> steps 1..1024
    CHECK(f.keys.eval.galois.by_step.size() == 11);
    for (uint32_t s = 1; s <= 1024; s <<= 1) CHECK(f.keys.eval.galois.by_step.count(s) == 1);
}

TEST_CASE("clear backend mirrors the contract exactly") {
    HeParams params = HeParams::test_profile();
    auto cb = SlotBackend::create(params, BackendKind::clear);
    auto keys = cb->keygen(42);
    std::mt19937_64 rng(31);
    auto va = random_slots(rng, params.slot_count);
    auto vb = random_slots(rng, params.slot_count);

    auto ca = cb->encrypt(cb->encode(va, params.max_level, params.scale()), keys.eval.public_key);
    auto cbct = cb->encrypt(cb->encode(vb, params.max_level, params.scale()), keys.eval.public_key);

    // values are exact
    auto sum = cb->decrypt(cb->add(ca, cbct), keys.secret);
    for (size_t i = 0; i < va.size(); ++i) CHECK(sum[i] == va[i] + vb[i]);

    auto prod = cb->mul(ca, cbct, keys.eval.relin);
    CHECK(prod.level == params.max_level - 1);
    auto pv = cb->decrypt(prod, keys.secret);
    for (size_t i = 0; i < va.size(); ++i) CHECK(pv[i] == va[i] * vb[i]);

    // same depth law
    auto p = cb->encode(va, 0, 1.0);
    Ciphertext at0 = ca;
    at0.level = 0;
    CHECK_THROWS_AS(cb->mul_plain(at0, p), DepthError);

    // same scale bookkeeping as the lattice backend (identical primes)
    auto lat = SlotBackend::create(params, BackendKind::lattice);
    auto lkeys = lat->keygen(42);
    auto lct = lat->encrypt(lat->encode(va, params.max_level, params.scale()), lkeys.eval.public_key);
    auto lprod = lat->mul(lct, lct, lkeys.eval.relin);
    auto cprod = cb->mul(ca, ca, keys.eval.relin);
    CHECK(lprod.scale == cprod.scale);
    CHECK(lprod.level == cprod.level);

    // nonce makes equal payloads distinct; wrong key pair is rejected
    auto e1 = cb->encrypt(cb->encode(va, params.max_level, params.scale()), keys.eval.public_key);
    auto e2 = cb->encrypt(cb->encode(va, params.max_level, params.scale()), keys.eval.public_key);
    CHECK(e1.nonce != e2.nonce);
    auto other = cb->keygen(99);
    CHECK_THROWS_AS(cb->decrypt(e1, other.secret), KeyError);

    // rotation parity incl. missing-key behavior
    auto rot = cb->decrypt(cb->rotate(ca, 5, keys.eval.galois), keys.secret);
    for (size_t i = 0; i < va.size(); ++i) CHECK(rot[i] == va[(i + 5) % va.size()]);
    GaloisKeys partial = keys.eval.galois;
    partial.by_step.erase(4);
    CHECK_THROWS_AS(cb->rotate(ca, 7, partial), KeyError);
}

TEST_CASE("backends do not accept each other's ciphertexts") {
    auto& f = fx();
    HeParams params = f.params;
    auto cb = SlotBackend::create(params, BackendKind::clear);
    auto ckeys = cb->keygen(1);
    auto cct = cb->encrypt(cb->encode(std::vector<double>(params.slot_count, 0.1), params.max_level,
                                      params.scale()),
                           ckeys.eval.public_key);
    CHECK_THROWS_AS(f.backend->decrypt(cct, f.keys.secret), ParamError);
}

}
