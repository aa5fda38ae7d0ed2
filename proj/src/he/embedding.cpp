#include "hematch/he/embedding.hpp"

#include <cmath>
#include <numbers>

#include "hematch/common/errors.hpp"

namespace hematch::he {

namespace {

uint32_t bit_reverse(uint32_t v, int bits) {
    uint32_t out = 0;
    for (int i = 0; i < bits; ++i) out |= ((v >> i) & 1u) << (bits - 1 - i);
    return out;
}

} // namespace

SlotCodec::SlotCodec(const RingContext& ctx) : n_(ctx.n()), slot_exp_(ctx.slot_exponents()) {
    size_t N = 2 * n_;
    int bits = 0;
    while ((size_t(1) << bits) < N) ++bits;
    bitrev_.resize(N);
    for (size_t i = 0; i < N; ++i) bitrev_[i] = bit_reverse(uint32_t(i), bits);
    roots_.resize(N);
    for (size_t k = 0; k < N; ++k) {
        double angle = 2.0 * std::numbers::pi * double(k) / double(N);
        roots_[k] = {std::cos(angle), std::sin(angle)};
    }
}

void SlotCodec::fft(std::vector<std::complex<double>>& v, bool forward) const {
    size_t N = v.size();
    for (size_t i = 0; i < N; ++i) {
        size_t j = bitrev_[i];
        if (i < j) std::swap(v[i], v[j]);
    }
    for (size_t len = 2; len <= N; len <<= 1) {
        size_t stride = N / len;
        for (size_t base = 0; base < N; base += len) {
            for (size_t k = 0; k < len / 2; ++k) {
                std::complex<double> w = roots_[k * stride];
                if (!forward) w = std::conj(w);
                auto u = v[base + k];
                auto t = v[base + k + len / 2] * w;
                v[base + k] = u + t;
                v[base + k + len / 2] = u - t;
            }
        }
    }
    if (!forward) {
        double inv = 1.0 / double(N);
        for (auto& x : v) x *= inv;
    }
}

void SlotCodec::encode(std::span<const double> slots, double scale, std::span<int64_t> out_coeffs) const {
    if (slots.size() != slot_count()) throw ShapeError("slot vector length mismatch");
    if (out_coeffs.size() != n_) throw ShapeError("coefficient buffer length mismatch");
    for (double v : slots)
        if (!std::isfinite(v)) throw ShapeError("slot values must be finite");
    size_t N = 2 * n_;
    std::vector<std::complex<double>> spec(N, {0.0, 0.0});
    for (size_t t = 0; t < slots.size(); ++t) {
        std::complex<double> z{slots[t] * scale, 0.0};
        spec[slot_exp_[t]] = z;
        spec[N - slot_exp_[t]] = std::conj(z);
    }
    fft(spec, false);
    for (size_t k = 0; k < n_; ++k) {
        double c = spec[k].real() - spec[k + n_].real();
        if (!(std::fabs(c) < 9.2e18)) throw ParamError("encoding overflow: scale too large for value range");
        out_coeffs[k] = llround(c);
    }
}

void SlotCodec::decode(std::span<const int64_t> coeffs, double scale, std::span<double> out_slots) const {
    if (coeffs.size() != n_) throw ShapeError("coefficient vector length mismatch");
    if (out_slots.size() != slot_count()) throw ShapeError("slot buffer length mismatch");
    size_t N = 2 * n_;
    std::vector<std::complex<double>> v(N, {0.0, 0.0});
    for (size_t k = 0; k < n_; ++k) v[k] = {double(coeffs[k]), 0.0};
    fft(v, true);
    for (size_t t = 0; t < out_slots.size(); ++t) out_slots[t] = v[slot_exp_[t]].real() / scale;
}

} // namespace hematch::he
