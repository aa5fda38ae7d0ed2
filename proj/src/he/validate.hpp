#pragma once

// Operand validation shared by both backends.  Internal header.

#include <cmath>
#include <string>

#include "hematch/common/errors.hpp"
#include "hematch/he/backend.hpp"

namespace hematch::he::detail {

inline constexpr double scale_match_tolerance = 1.0 / double(uint64_t(1) << 30);

inline void check_digest(uint64_t got, uint64_t want, const char* what) {
    if (got != want)
        throw KeyError(std::string(what) + " params digest mismatch: container was produced under a different parameter set");
}

inline void check_ciphertext(const RingContext& ctx, BackendKind kind, const Ciphertext& c, const char* what) {
    if (c.backend != kind) throw ParamError(std::string(what) + " belongs to the other backend");
    check_digest(c.params_digest, ctx.params_digest(), what);
    if (c.level < 0 || c.level > ctx.params().max_level)
        throw ParamError(std::string(what) + " level out of range");
    if (!(c.scale > 0.0)) throw ParamError(std::string(what) + " has non-positive scale");
}

inline void check_plaintext(const RingContext& ctx, BackendKind kind, const Plaintext& p, const char* what) {
    if (p.backend != kind) throw ParamError(std::string(what) + " belongs to the other backend");
    check_digest(p.params_digest, ctx.params_digest(), what);
    if (p.level < 0 || p.level > ctx.params().max_level)
        throw ParamError(std::string(what) + " level out of range");
    if (!(p.scale > 0.0)) throw ParamError(std::string(what) + " has non-positive scale");
}

inline void check_same_level(int a, int b) {
    if (a != b)
        throw AlignmentError("operand levels differ (" + std::to_string(a) + " vs " + std::to_string(b) + ")");
}

inline void check_same_scale(double a, double b) {
    if (std::fabs(a / b - 1.0) > scale_match_tolerance)
        throw AlignmentError("operand scales differ beyond tolerance");
}

inline void check_mul_depth(int level) {
    if (level < 1) throw DepthError("no rescale levels remain for a multiply");
}

} // namespace hematch::he::detail
