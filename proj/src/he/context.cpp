#include "hematch/he/context.hpp"

#include <bit>
#include <map>
#include <mutex>

#include "hematch/common/errors.hpp"

namespace hematch::he {

namespace {

uint32_t bit_reverse(uint32_t v, int bits) {
    uint32_t out = 0;
    for (int i = 0; i < bits; ++i) out |= ((v >> i) & 1u) << (bits - 1 - i);
    return out;
}

PrimeTables build_prime_tables(uint64_t q, size_t n) {
    PrimeTables t;
    t.mod = Modulus(q);
    uint64_t root = find_primitive_root(2 * n, t.mod);
    uint64_t root_inv = inv_mod(root, t.mod);
    int logn = std::countr_zero(n);
    t.root_br.resize(n);
    t.root_br_quo.resize(n);
    t.root_inv_br.resize(n);
    t.root_inv_br_quo.resize(n);
    uint64_t pow = 1, pow_inv = 1;
    for (size_t i = 0; i < n; ++i) {
        uint32_t r = bit_reverse(uint32_t(i), logn);
        t.root_br[r] = pow;
        t.root_inv_br[r] = pow_inv;
        pow = t.mod.mul(pow, root);
        pow_inv = t.mod.mul(pow_inv, root_inv);
    }
    for (size_t i = 0; i < n; ++i) {
        t.root_br_quo[i] = shoup_precompute(t.root_br[i], q);
        t.root_inv_br_quo[i] = shoup_precompute(t.root_inv_br[i], q);
    }
    t.n_inv = inv_mod(uint64_t(n) % q, t.mod);
    t.n_inv_quo = shoup_precompute(t.n_inv, q);
    return t;
}

} // namespace

RingContext::RingContext(const HeParams& params, bool build_tables) : params_(params) {
    params_.validate();
    size_t n = params_.poly_degree;
    uint64_t two_n = 2 * uint64_t(n);

    primes_ = generate_ntt_primes(params_.modulus_chain, two_n);
    for (uint64_t q : primes_) moduli_.emplace_back(q);
    digest_ = params_.digest();

    size_t K = data_prime_count();
    drop_inv_.resize(K);
    for (size_t l = 1; l < K; ++l) {
        drop_inv_[l].resize(l);
        for (size_t j = 0; j < l; ++j)
            drop_inv_[l][j] = inv_mod(primes_[l] % primes_[j], moduli_[j]);
    }
    special_inv_.resize(K);
    special_red_.resize(K);
    for (size_t j = 0; j < K; ++j) {
        special_red_[j] = special_prime() % primes_[j];
        special_inv_[j] = inv_mod(special_red_[j], moduli_[j]);
    }

    uint32_t slots = params_.slot_count;
    int log_slots = std::countr_zero(slots);
    uint64_t g = 5;
    // rot_elements_[t] = 5^(2^t) mod 2n; left rotation by any step is a
    // product of these.
    for (int t = 0; t < log_slots; ++t) {
        rot_elements_.push_back(uint32_t(g));
        g = (u128(g) * g) % two_n;
    }

    slot_exp_.resize(slots);
    uint64_t e = 1;
    for (uint32_t t = 0; t < slots; ++t) {
        slot_exp_[t] = uint32_t(e);
        e = (e * 5) % two_n;
    }

    if (build_tables) {
        tables_.reserve(primes_.size());
        for (uint64_t q : primes_) tables_.push_back(build_prime_tables(q, n));

        for (uint32_t elt : rot_elements_) {
            if (auto_maps_.count(elt)) continue;
            std::vector<uint32_t> map(n);
            for (size_t i = 0; i < n; ++i) {
                uint64_t j = (i * uint64_t(elt)) % two_n;
                uint32_t entry = uint32_t(j >= n ? j - n : j);
                if (j >= n) entry |= auto_negate_bit;
                map[i] = entry;
            }
            auto_maps_.emplace(elt, std::move(map));
        }
    }
}

const PrimeTables& RingContext::tables(size_t prime_index) const {
    if (tables_.empty()) throw ParamError("context was built without transform tables");
    return tables_[prime_index];
}

const std::vector<uint32_t>& RingContext::automorphism_map(uint32_t galois_element) const {
    auto it = auto_maps_.find(galois_element);
    if (it == auto_maps_.end()) throw KeyError("unsupported automorphism element " + std::to_string(galois_element));
    return it->second;
}

std::shared_ptr<const RingContext> make_context(const HeParams& params, bool build_tables) {
    static std::mutex mu;
    static std::map<std::pair<uint64_t, bool>, std::weak_ptr<const RingContext>> cache;
    uint64_t d = params.digest();
    std::lock_guard<std::mutex> lk(mu);
    auto key = std::make_pair(d, build_tables);
    if (auto it = cache.find(key); it != cache.end())
        if (auto sp = it->second.lock()) return sp;
    auto sp = std::make_shared<const RingContext>(params, build_tables);
    cache[key] = sp;
    return sp;
}

} // namespace hematch::he
