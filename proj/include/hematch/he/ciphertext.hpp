#pragma once

#include <cstdint>
#include <vector>

#include "hematch/he/params.hpp"
#include "hematch/he/rns.hpp"

namespace hematch::he {

// Encoded slot vector pinned to a level and scale.  The lattice backend
// stores ring coefficients; the clear backend stores the slots directly but
// keeps identical level/scale bookkeeping so depth errors fire the same way.
struct Plaintext {
    BackendKind backend = BackendKind::lattice;
    uint64_t params_digest = 0;
    int level = 0;
    double scale = 0.0;
    RnsPoly poly;              // lattice, coefficient domain
    std::vector<double> slots; // clear
};

struct Ciphertext {
    BackendKind backend = BackendKind::lattice;
    uint64_t params_digest = 0;
    int level = 0;
    double scale = 0.0;
    std::vector<RnsPoly> comps; // lattice, coefficient domain, always two
    std::vector<double> slots;  // clear
    uint64_t nonce = 0;         // clear: fresh per encryption so equal payloads differ
    uint64_t key_tag = 0;       // clear: binds the ciphertext to its key pair
};

} // namespace hematch::he
