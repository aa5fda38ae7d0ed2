#include <doctest.h>

#include <filesystem>
#include <random>

#include "hematch/client/pipeline.hpp"
#include "hematch/common/binio.hpp"
#include "hematch/common/errors.hpp"
#include "hematch/registry/registry.hpp"

using namespace hematch;
using namespace hematch::registry;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir(const char* tag) {
        path = fs::temp_directory_path() / (std::string("hematch_reg_") + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::array<double, 16> vec16(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::array<double, 16> out{};
    for (auto& v : out) v = dist(rng);
    return out;
}

struct ClearFixture {
    std::shared_ptr<he::SlotBackend> backend =
        he::SlotBackend::create(he::HeParams::test_profile(), he::BackendKind::clear);
    he::KeyBundle keys = backend->keygen(23);

    he::Ciphertext pack(const std::array<double, 16>& u) const {
        return client::pack_registration(u, *backend, keys.eval.public_key);
    }
};

ClearFixture& cf() {
    static ClearFixture f;
    return f;
}

bool same_file_bytes(const fs::path& a, const fs::path& b) {
    return read_file(a) == read_file(b);
}

} // namespace

TEST_SUITE("registry") {

TEST_CASE("sequential allocation fills shards in order") {
    CHECK(allocate_slot(0, 512).shard_index == 0);
    CHECK(allocate_slot(0, 512).local_index == 0);
    CHECK(allocate_slot(512, 512).shard_index == 1);
    CHECK(allocate_slot(512, 512).local_index == 0);
    CHECK(allocate_slot(513, 512).shard_index == 1);
    CHECK(allocate_slot(513, 512).local_index == 1);
    CHECK_THROWS_AS(allocate_slot(3, 0), ParamError);
}

TEST_CASE("registration lands each vector at its block") {
    auto& f = cf();
    Registry reg(f.backend, f.keys.eval.galois);
    std::mt19937_64 rng(601);

    auto u0 = vec16(rng);
    auto u1 = vec16(rng);
    auto u2 = vec16(rng);
    CHECK(reg.enroll(f.pack(u0), "alice") == 0);
    CHECK(reg.enroll(f.pack(u1), "bob") == 1);
    CHECK(reg.enroll(f.pack(u2), "carol") == 2);
    CHECK(reg.registered_count() == 3);
    CHECK(reg.shard_count() == 1);

    auto snap = reg.snapshot();
    REQUIRE(snap.size() == 1);
    auto slots = f.backend->decrypt(snap[0]->c_r, f.keys.secret);
    for (size_t t = 0; t < 16; ++t) {
        CHECK(slots[t] == u0[t]);
        CHECK(slots[16 + t] == u1[t]);
        CHECK(slots[32 + t] == u2[t]);
    }
    for (size_t s = 48; s < slots.size(); ++s) CHECK(slots[s] == 0.0);
    CHECK(snap[0]->occupancy.count() == 3);
}

TEST_CASE("explicit registration at a later block leaves earlier ones empty") {
    auto& f = cf();
    Registry reg(f.backend, f.keys.eval.galois);
    std::mt19937_64 rng(602);
    auto u = vec16(rng);

    CHECK(reg.register_at(f.pack(u), "dan", 0, 2) == 2);
    auto slots = f.backend->decrypt(reg.snapshot()[0]->c_r, f.keys.secret);
    for (size_t t = 0; t < 16; ++t) CHECK(slots[32 + t] == u[t]);
    for (size_t s = 0; s < 32; ++s) CHECK(slots[s] == 0.0);
}

TEST_CASE("occupied blocks reject a second registration") {
    auto& f = cf();
    Registry reg(f.backend, f.keys.eval.galois);
    std::mt19937_64 rng(603);
    reg.enroll(f.pack(vec16(rng)), "alice");
    CHECK_THROWS_AS(reg.register_at(f.pack(vec16(rng)), "mallory", 0, 0), ConflictError);
    // Gaps in the shard sequence are refused too.
    CHECK_THROWS_AS(reg.register_at(f.pack(vec16(rng)), "gap", 2, 0), ConflictError);
    CHECK(reg.lookup_identity(0) == "alice");
}

TEST_CASE("identity lookups") {
    auto& f = cf();
    Registry reg(f.backend, f.keys.eval.galois);
    std::mt19937_64 rng(604);
    reg.enroll(f.pack(vec16(rng)), "alice");
    CHECK(reg.lookup_identity(0) == "alice");
    CHECK_THROWS_AS(reg.lookup_identity(1), NotFoundError);
    CHECK_THROWS_AS(reg.lookup_identity(12345), NotFoundError);
}

TEST_CASE("registration order does not change shard contents") {
    auto& f = cf();
    std::mt19937_64 rng(605);
    std::vector<std::array<double, 16>> users(5);
    for (auto& u : users) u = vec16(rng);

    Registry forward(f.backend, f.keys.eval.galois);
    for (size_t i = 0; i < users.size(); ++i)
        forward.register_at(f.pack(users[i]), "u" + std::to_string(i), 0,
                            static_cast<uint32_t>(i));

    Registry backward(f.backend, f.keys.eval.galois);
    // Reverse order needs the shard to exist first, so seed block 4 first.
    for (size_t k = users.size(); k-- > 0;)
        backward.register_at(f.pack(users[k]), "u" + std::to_string(k), 0,
                             static_cast<uint32_t>(k));

    auto a = f.backend->decrypt(forward.snapshot()[0]->c_r, f.keys.secret);
    auto b = f.backend->decrypt(backward.snapshot()[0]->c_r, f.keys.secret);
    CHECK(a == b);
}

TEST_CASE("registration works identically on the lattice backend") {
    std::shared_ptr<he::SlotBackend> backend = he::SlotBackend::create(he::HeParams::test_profile(), he::BackendKind::lattice);
    auto keys = backend->keygen(606);
    Registry reg(backend, keys.eval.galois);
    std::mt19937_64 rng(607);

    auto u0 = vec16(rng);
    auto u5 = vec16(rng);
    reg.enroll(client::pack_registration(u0, *backend, keys.eval.public_key), "alice");
    reg.register_at(client::pack_registration(u5, *backend, keys.eval.public_key), "eve", 0, 5);

    auto slots = backend->decrypt(reg.snapshot()[0]->c_r, keys.secret);
    for (size_t t = 0; t < 16; ++t) {
        CHECK(slots[t] == doctest::Approx(u0[t]).epsilon(1e-4));
        CHECK(slots[80 + t] == doctest::Approx(u5[t]).epsilon(1e-4));
    }
    for (size_t s = 16; s < 80; ++s) CHECK(std::fabs(slots[s]) < 1e-4);
}

TEST_CASE("persisted registries reload byte-identically") {
    auto& f = cf();
    auto reg = std::make_unique<Registry>(f.backend, f.keys.eval.galois);
    std::mt19937_64 rng(608);

    const size_t n = 1000; // spills into shard 7 at capacity 128
    for (size_t i = 0; i < n; ++i)
        reg->enroll(f.pack(vec16(rng)), "user-" + std::to_string(i));
    CHECK(reg->shard_count() == 8);

    TempDir dir_a("a"), dir_b("b");
    reg->persist(dir_a.path);
    auto loaded = Registry::load(dir_a.path, f.backend, f.keys.eval.galois);
    CHECK(loaded->registered_count() == n);
    CHECK(loaded->lookup_identity(999) == "user-999");
    CHECK(loaded->next_slot().shard_index == 7);
    CHECK(loaded->next_slot().local_index == 1000 - 7 * 128);

    loaded->persist(dir_b.path);
    for (const auto& entry : fs::directory_iterator(dir_a.path)) {
        CAPTURE(entry.path().filename().string());
        CHECK(same_file_bytes(entry.path(), dir_b.path / entry.path().filename()));
    }

    // Enrollment continues seamlessly after a reload.
    auto extra = vec16(rng);
    CHECK(loaded->enroll(f.pack(extra), "late") == 1000);
}

TEST_CASE("empty registries round-trip") {
    auto& f = cf();
    Registry reg(f.backend, f.keys.eval.galois);
    TempDir dir("empty");
    reg.persist(dir.path);
    auto loaded = Registry::load(dir.path, f.backend, f.keys.eval.galois);
    CHECK(loaded->registered_count() == 0);
    CHECK(loaded->shard_count() == 0);
}

TEST_CASE("damaged registry files are rejected") {
    auto& f = cf();
    Registry reg(f.backend, f.keys.eval.galois);
    std::mt19937_64 rng(609);
    reg.enroll(f.pack(vec16(rng)), "alice");

    TempDir dir("damage");
    reg.persist(dir.path);

    SUBCASE("corrupted shard magic") {
        auto shard_path = dir.path / "shard-0.hct";
        auto bytes = read_file(shard_path);
        bytes[0] ^= 0xff;
        write_file(shard_path, bytes);
        CHECK_THROWS_AS(Registry::load(dir.path, f.backend, f.keys.eval.galois), FormatError);
    }
    SUBCASE("unknown identities header") {
        write_text_file(dir.path / "identities.txt", "identities v999\n0,alice\n");
        CHECK_THROWS_AS(Registry::load(dir.path, f.backend, f.keys.eval.galois), FormatError);
    }
    SUBCASE("occupancy bit without identity") {
        write_text_file(dir.path / "identities.txt", "hematch-identities v1\n");
        CHECK_THROWS_AS(Registry::load(dir.path, f.backend, f.keys.eval.galois), FormatError);
    }
    SUBCASE("identity without occupancy bit") {
        auto occ = read_text_file(dir.path / "occupancy.txt");
        // Clear the single occupancy bit: digit for bit 0 becomes 0.
        auto pos = occ.find("0,1");
        REQUIRE(pos != std::string::npos);
        occ[pos + 2] = '0';
        write_text_file(dir.path / "occupancy.txt", occ);
        CHECK_THROWS_AS(Registry::load(dir.path, f.backend, f.keys.eval.galois), FormatError);
    }
    SUBCASE("missing shard file") {
        fs::remove(dir.path / "shard-0.hct");
        CHECK_THROWS_AS(Registry::load(dir.path, f.backend, f.keys.eval.galois), FormatError);
    }
}

TEST_CASE("rotation keys from another parameter set are rejected") {
    auto& f = cf();
    auto other = he::SlotBackend::create(
        he::HeParams::custom(8192, {60, 40, 40, 40, 60}, 40), he::BackendKind::clear);
    auto other_keys = other->keygen(1);
    CHECK_THROWS_AS(Registry(f.backend, other_keys.eval.galois), KeyError);
}

} // TEST_SUITE
