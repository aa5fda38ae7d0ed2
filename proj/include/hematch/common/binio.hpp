#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hematch/common/errors.hpp"

namespace hematch {

// Byte-level writer/reader used by every on-disk container and by the wire
// envelope.  Containers use little-endian fields; the envelope frame header
// uses big-endian (noted at each call site).

class ByteWriter {
public:
    void u8(uint8_t v) { buf_.push_back(v); }

    void u16_be(uint16_t v) {
        buf_.push_back(uint8_t(v >> 8));
        buf_.push_back(uint8_t(v));
    }

    void u32_be(uint32_t v) {
        for (int i = 3; i >= 0; --i) buf_.push_back(uint8_t(v >> (8 * i)));
    }

    void u32_le(uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(uint8_t(v >> (8 * i)));
    }

    void u64_le(uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(uint8_t(v >> (8 * i)));
    }

    void f64_le(double v) {
        u64_le(std::bit_cast<uint64_t>(v));
    }

    void bytes(std::span<const uint8_t> b) { buf_.insert(buf_.end(), b.begin(), b.end()); }

    void ascii(const std::string& s) {
        buf_.insert(buf_.end(), s.begin(), s.end());
    }

    const std::vector<uint8_t>& data() const { return buf_; }
    std::vector<uint8_t> take() { return std::move(buf_); }
    size_t size() const { return buf_.size(); }

private:
    std::vector<uint8_t> buf_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const uint8_t> data) : data_(data) {}

    uint8_t u8() { return take(1)[0]; }

    uint16_t u16_be() {
        auto b = take(2);
        return uint16_t(b[0]) << 8 | b[1];
    }

    uint32_t u32_be() {
        auto b = take(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = v << 8 | b[i];
        return v;
    }

    uint32_t u32_le() {
        auto b = take(4);
        uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = v << 8 | b[i];
        return v;
    }

    uint64_t u64_le() {
        auto b = take(8);
        uint64_t v = 0;
        for (int i = 7; i >= 0; --i) v = v << 8 | b[i];
        return v;
    }

    double f64_le() { return std::bit_cast<double>(u64_le()); }

    std::span<const uint8_t> bytes(size_t n) { return take(n); }

    size_t remaining() const { return data_.size() - pos_; }
    bool done() const { return remaining() == 0; }

private:
    std::span<const uint8_t> take(size_t n) {
        if (remaining() < n) throw FormatError("container truncated");
        auto out = data_.subspan(pos_, n);
        pos_ += n;
        return out;
    }

    std::span<const uint8_t> data_;
    size_t pos_ = 0;
};

std::vector<uint8_t> read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, std::span<const uint8_t> data);
std::string read_text_file(const std::filesystem::path& p);
void write_text_file(const std::filesystem::path& p, const std::string& text);

// FNV-1a, used for parameter digests and container integrity tags.
class Fnv1a {
public:
    void feed(uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h_ ^= (v >> (8 * i)) & 0xff;
            h_ *= 0x100000001b3ULL;
        }
    }

    void feed_bytes(std::span<const uint8_t> b) {
        for (uint8_t x : b) {
            h_ ^= x;
            h_ *= 0x100000001b3ULL;
        }
    }

    uint64_t digest() const { return h_; }

private:
    uint64_t h_ = 0xcbf29ce484222325ULL;
};

} // namespace hematch
