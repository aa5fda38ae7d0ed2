#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "hematch/he/context.hpp"

namespace hematch::he {

// Maps slot vectors to integer polynomial coefficients and back.  Slot t is
// the value of the polynomial at zeta^(5^t mod 2n) where zeta is a primitive
// 2n-th root of unity; the 5^t orbit makes slot rotation a coefficient
// automorphism.  Conjugate symmetry in the spectrum keeps coefficients real.
class SlotCodec {
public:
    explicit SlotCodec(const RingContext& ctx);

    size_t slot_count() const { return slot_exp_.size(); }
    size_t coeff_count() const { return n_; }

    // out_coeffs receives n centered integers ~ round(scale * embedding).
    void encode(std::span<const double> slots, double scale, std::span<int64_t> out_coeffs) const;
    void decode(std::span<const int64_t> coeffs, double scale, std::span<double> out_slots) const;

private:
    void fft(std::vector<std::complex<double>>& v, bool forward) const;

    size_t n_;
    std::vector<uint32_t> slot_exp_;
    std::vector<uint32_t> bitrev_;
    std::vector<std::complex<double>> roots_; // exp(2*pi*i*k / 2n)
};

} // namespace hematch::he
