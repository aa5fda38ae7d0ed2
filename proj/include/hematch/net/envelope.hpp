#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace hematch::net {

// Request types occupy the low range; a success reply echoes its request
// type with the high bit set; error_reply carries any failure.
enum class MsgType : uint16_t {
    enroll = 0x01,
    auth = 0x02,
    identity = 0x03,
    health = 0x04,
    worker_score = 0x11,
    error_reply = 0x7f,
    enroll_ok = 0x81,
    auth_ok = 0x82,
    identity_ok = 0x83,
    health_ok = 0x84,
    worker_score_ok = 0x91,
};

bool known_msg_type(uint16_t raw);
MsgType reply_type(MsgType request);

struct Envelope {
    MsgType type = MsgType::health;
    std::map<std::string, std::string> headers;
    std::vector<uint8_t> payload;

    bool operator==(const Envelope&) const = default;

    // Missing header -> ProtocolError naming the key.
    const std::string& require_header(const std::string& key) const;
};

// Hard cap on one frame; large enough for any production-profile key
// container, small enough to stop a bad length prefix from allocating wild.
inline constexpr size_t max_frame_bytes = size_t(1) << 30;

// Frame layout: u32 BE body length, then the body: u16 BE type, zero or
// more "key:value\n" lines, one empty line, payload bytes.  The length
// covers the whole body.  Header keys must be nonempty and free of ':';
// keys and values must be free of line breaks.
std::vector<uint8_t> encode_envelope(const Envelope& e);

// Parses one complete frame including the length prefix; ProtocolError on
// any structural violation, trailing bytes included.
Envelope decode_envelope(std::span<const uint8_t> frame);

// Body-only variant for transports that consumed the length prefix already.
Envelope decode_envelope_body(std::span<const uint8_t> body);

} // namespace hematch::net
