#include <doctest.h>

#include <chrono>
#include <cmath>
#include <random>

#include "hematch/client/pipeline.hpp"
#include "hematch/common/errors.hpp"
#include "hematch/oracle/clear_oracle.hpp"

using namespace hematch;
using namespace hematch::oracle;

namespace {

std::array<double, 16> random16(std::mt19937_64& rng, double span = 2.0) {
    std::uniform_real_distribution<double> dist(-span, span);
    std::array<double, 16> out{};
    for (auto& v : out) v = dist(rng);
    return out;
}

ClearRegistry random_registry(std::mt19937_64& rng, size_t n) {
    ClearRegistry reg;
    reg.entries.resize(n);
    for (size_t i = 0; i < n; ++i) {
        reg.entries[i].global_index = i;
        reg.entries[i].user_id = "u" + std::to_string(i);
        reg.entries[i].features = random16(rng);
    }
    return reg;
}

} // namespace

TEST_SUITE("oracle") {

TEST_CASE("the two score implementations agree to machine precision") {
    std::mt19937_64 rng(501);
    for (int trial = 0; trial < 10; ++trial) {
        auto reg = random_registry(rng, 64);
        auto u = random16(rng);
        auto b = random16(rng, 0.5);
        auto w = random16(rng, 1.0);
        auto tree = clear_score(reg, u, b, w);
        auto seq = clear_score_sequential(reg, u, b, w);
        REQUIRE(tree.size() == seq.size());
        for (size_t i = 0; i < tree.size(); ++i) {
            CHECK(tree[i].first == seq[i].first);
            CHECK(std::fabs(tree[i].second - seq[i].second) <=
                  1e-12 * std::max(1.0, std::fabs(seq[i].second)));
        }
    }
}

TEST_CASE("score of a vector against itself with zero bias is zero") {
    std::mt19937_64 rng(502);
    auto u = random16(rng);
    ClearRegistry reg;
    reg.entries.push_back({0, u, "self"});
    std::array<double, 16> zero{};
    std::array<double, 16> w{};
    w.fill(-1.0);
    auto scores = clear_score(reg, u, zero, w);
    CHECK(scores[0].second == 0.0);
}

TEST_CASE("hand-computed two-user case") {
    ClearRegistry reg;
    ClearEntry a, b;
    a.global_index = 0;
    a.user_id = "a";
    a.features.fill(1.0);
    b.global_index = 1;
    b.user_id = "b";
    b.features.fill(3.0);
    reg.entries = {a, b};

    std::array<double, 16> u{};
    u.fill(2.0);
    std::array<double, 16> bias{};
    bias.fill(0.5);
    std::array<double, 16> w{};
    w.fill(2.0);

    // Per slot: a: ((1-2)+0.5)^2 * 2 = 0.5; b: ((3-2)+0.5)^2 * 2 = 4.5.
    auto scores = clear_score(reg, u, bias, w);
    CHECK(scores[0].second == doctest::Approx(16 * 0.5));
    CHECK(scores[1].second == doctest::Approx(16 * 4.5));
}

TEST_CASE("layout oracle pins the published index arithmetic") {
    // Production layout: slot 17 is shard 1, local 1, global 513.
    auto at_production = layout_oracle(5000, 513, 8192);
    CHECK(at_production.group == 0);
    CHECK(at_production.slot == 17);
    CHECK(client::recover_index(17, 512) == 513);

    auto zero = layout_oracle(100, 0, 8192);
    CHECK(zero.group == 0);
    CHECK(zero.slot == 0);

    // Global 1 is local 1 of shard 0: head slot 16, offset 0.
    auto one = layout_oracle(5000, 1, 8192);
    CHECK(one.slot == 16);
}

TEST_CASE("layout oracle round-trips recover_index over a full sweep") {
    const size_t slot_count = 2048;
    const size_t capacity = slot_count / 16;
    const size_t population = 300;
    std::vector<bool> seen(16 * capacity, false);
    for (uint64_t idx = 0; idx < population; ++idx) {
        auto pos = layout_oracle(population, idx, slot_count);
        REQUIRE(pos.group == 0);
        auto back = client::recover_index(pos.slot, capacity);
        CHECK(back == idx);
        CHECK(!seen[pos.slot]);
        seen[pos.slot] = true;
    }
}

TEST_CASE("layout oracle spills into later groups past sixteen shards") {
    const size_t slot_count = 2048;
    const size_t capacity = slot_count / 16;
    const size_t population = 17 * capacity; // 17 shards, 2 groups
    auto pos = layout_oracle(population, 16 * capacity + 5, slot_count);
    CHECK(pos.group == 1);
    CHECK(pos.slot == 16 * 5); // shard 16 has offset 0 in its group
    CHECK_THROWS_AS(layout_oracle(10, 10, slot_count), BoundsError);
}

TEST_CASE("synthetic fixtures are deterministic and honor sigma zero") {
    SyntheticSpec spec;
    spec.population = 40;
    spec.seed = 9;
    spec.genuine_count = 5;
    spec.imposter_count = 5;

    auto a = gen_synthetic(spec);
    auto b = gen_synthetic(spec);
    REQUIRE(a.registry.entries.size() == 40);
    CHECK(a.registry.entries[7].features == b.registry.entries[7].features);
    CHECK(a.genuine[2].features == b.genuine[2].features);
    CHECK(a.imposters[4] == b.imposters[4]);

    spec.seed = 10;
    auto c = gen_synthetic(spec);
    CHECK(a.registry.entries[7].features != c.registry.entries[7].features);

    spec.genuine_noise = 0.0;
    auto exact = gen_synthetic(spec);
    for (const auto& q : exact.genuine)
        CHECK(q.features == exact.registry.entries[q.true_index].features);
}

TEST_CASE("synthetic generation rejects margin violations") {
    SyntheticSpec spec;
    spec.population = 30;
    spec.seed = 11;
    spec.genuine_noise = 3.0; // genuine scores no longer sit near zero
    CHECK_THROWS_AS(gen_synthetic(spec), ConfigError);
}

TEST_CASE("five-thousand-user fixture generates in under a second") {
    SyntheticSpec spec;
    spec.population = 5000;
    spec.seed = 12;
    spec.genuine_count = 20;
    spec.imposter_count = 20;
    auto start = std::chrono::steady_clock::now();
    auto fx = gen_synthetic(spec);
    auto elapsed = std::chrono::steady_clock::now() - start;
    CHECK(fx.registry.entries.size() == 5000);
    CHECK(std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count() < 1000);
}

TEST_CASE("bulk-packed shards decrypt to the registry layout") {
    auto backend = he::SlotBackend::create(he::HeParams::test_profile(), he::BackendKind::clear);
    auto keys = backend->keygen(13);
    std::mt19937_64 rng(503);
    auto reg = random_registry(rng, 140); // spills into shard 1

    auto shards = pack_clear_shards(reg, *backend, keys.eval.public_key);
    REQUIRE(shards.size() == 2);
    CHECK(shards[0]->occupancy.count() == 128);
    CHECK(shards[1]->occupancy.count() == 12);

    auto slots0 = backend->decrypt(shards[0]->c_r, keys.secret);
    auto slots1 = backend->decrypt(shards[1]->c_r, keys.secret);
    for (size_t t = 0; t < 16; ++t) {
        CHECK(slots0[16 * 3 + t] == reg.entries[3].features[t]);
        CHECK(slots1[t] == reg.entries[128].features[t]);
    }
    for (size_t s = 16 * 12; s < slots1.size(); ++s) CHECK(slots1[s] == 0.0);
}

} // TEST_SUITE
