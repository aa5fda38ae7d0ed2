#include "hematch/he/params.hpp"

#include <numeric>
#include <string>

#include "hematch/common/binio.hpp"
#include "hematch/common/errors.hpp"
#include "hematch/he/modmath.hpp"

namespace hematch::he {

HeParams HeParams::production() {
    HeParams p;
    p.poly_degree = 16384;
    p.slot_count = 8192;
    p.modulus_chain = {60, 40, 40, 40, 60};
    p.scale_bits = 40;
    p.max_level = 3;
    p.profile = Profile::production;
    p.validate();
    return p;
}

HeParams HeParams::test_profile() {
    // Same chain shape and depth as production on a small ring; fast enough
    // for unit tests while exercising identical code paths.
    HeParams p;
    p.poly_degree = 4096;
    p.slot_count = 2048;
    p.modulus_chain = {60, 40, 40, 40, 60};
    p.scale_bits = 40;
    p.max_level = 3;
    p.profile = Profile::test;
    p.validate();
    return p;
}

HeParams HeParams::custom(uint32_t poly_degree, std::vector<int> chain, int scale_bits) {
    HeParams p;
    p.poly_degree = poly_degree;
    p.slot_count = poly_degree / 2;
    p.modulus_chain = std::move(chain);
    p.scale_bits = scale_bits;
    p.max_level = int(p.modulus_chain.size()) - 2;
    p.profile = Profile::test;
    p.validate();
    return p;
}

void HeParams::validate() const {
    if (poly_degree < 32 || (poly_degree & (poly_degree - 1)) != 0)
        throw ParamError("poly_degree must be a power of two >= 32, got " + std::to_string(poly_degree));
    if (slot_count != poly_degree / 2)
        throw ParamError("slot_count must equal poly_degree / 2");
    if (slot_count % feature_dim != 0)
        throw ParamError("slot_count must be a multiple of the feature block width");
    if (modulus_chain.size() < 3)
        throw ParamError("modulus chain needs at least one data prime, one rescale prime, and the switching prime");
    for (int b : modulus_chain)
        if (b < 20 || b > 60) throw ParamError("modulus chain bit sizes must be in [20, 60]");
    if (max_level != int(modulus_chain.size()) - 2)
        throw ParamError("max_level must equal modulus chain length - 2");
    if (scale_bits < 10 || scale_bits > 60)
        throw ParamError("scale_bits must be in [10, 60]");
    if (profile == Profile::production) {
        int total = std::accumulate(modulus_chain.begin(), modulus_chain.end(), 0);
        if (poly_degree != 16384 || total != 240 || scale_bits != 40 || max_level < 3)
            throw ParamError("production profile constants are fixed: degree 16384, 240 modulus bits, scale 2^40, depth >= 3");
    }
}

uint64_t HeParams::digest() const {
    Fnv1a h;
    h.feed(poly_degree);
    h.feed(slot_count);
    h.feed(uint64_t(modulus_chain.size()));
    for (int b : modulus_chain) h.feed(uint64_t(b));
    h.feed(uint64_t(scale_bits));
    h.feed(uint64_t(max_level));
    h.feed(uint64_t(profile));
    std::vector<int> bits(modulus_chain.begin(), modulus_chain.end());
    for (uint64_t q : generate_ntt_primes(bits, 2 * uint64_t(poly_degree))) h.feed(q);
    return h.digest();
}

} // namespace hematch::he
