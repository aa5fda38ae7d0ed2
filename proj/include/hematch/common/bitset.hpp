#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hematch/common/errors.hpp"

namespace hematch {

// Fixed-size bitset with a hex wire form.  Bit i lives at hex digit i/4,
// within the digit at weight 1 << (i % 4), so "1" means bit 0 only and "8001"
// means bits 0 and 15.  Hex length is always ceil(size/4) digits.
class DynBitset {
public:
    DynBitset() = default;
    explicit DynBitset(size_t size) : size_(size), words_((size + 63) / 64, 0) {}

    size_t size() const { return size_; }

    bool get(size_t i) const {
        check(i);
        return (words_[i / 64] >> (i % 64)) & 1u;
    }

    void set(size_t i, bool v = true) {
        check(i);
        uint64_t mask = uint64_t(1) << (i % 64);
        if (v)
            words_[i / 64] |= mask;
        else
            words_[i / 64] &= ~mask;
    }

    size_t count() const {
        size_t c = 0;
        for (uint64_t w : words_) c += size_t(__builtin_popcountll(w));
        return c;
    }

    bool any() const {
        for (uint64_t w : words_)
            if (w) return true;
        return false;
    }

    std::string to_hex() const {
        static const char digits[] = "0123456789abcdef";
        std::string out((size_ + 3) / 4, '0');
        for (size_t d = 0; d < out.size(); ++d) {
            unsigned nibble = 0;
            for (size_t b = 0; b < 4; ++b) {
                size_t i = d * 4 + b;
                if (i < size_ && get(i)) nibble |= 1u << b;
            }
            out[d] = digits[nibble];
        }
        return out;
    }

    static DynBitset from_hex(const std::string& hex, size_t size) {
        if (hex.size() != (size + 3) / 4) throw FormatError("occupancy hex length mismatch");
        DynBitset out(size);
        for (size_t d = 0; d < hex.size(); ++d) {
            char c = hex[d];
            unsigned nibble;
            if (c >= '0' && c <= '9')
                nibble = unsigned(c - '0');
            else if (c >= 'a' && c <= 'f')
                nibble = unsigned(c - 'a' + 10);
            else if (c >= 'A' && c <= 'F')
                nibble = unsigned(c - 'A' + 10);
            else
                throw FormatError("occupancy hex has non-hex digit");
            for (size_t b = 0; b < 4; ++b) {
                size_t i = d * 4 + b;
                if (nibble & (1u << b)) {
                    if (i >= size) throw FormatError("occupancy bit beyond declared size");
                    out.set(i);
                }
            }
        }
        return out;
    }

    friend bool operator==(const DynBitset&, const DynBitset&) = default;

private:
    void check(size_t i) const {
        if (i >= size_) throw BoundsError("bit index " + std::to_string(i) + " out of range");
    }

    size_t size_ = 0;
    std::vector<uint64_t> words_;
};

} // namespace hematch
