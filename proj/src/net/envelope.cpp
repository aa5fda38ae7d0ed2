#include "hematch/net/envelope.hpp"

#include <algorithm>

#include "hematch/common/errors.hpp"

namespace hematch::net {

namespace {

void check_header(const std::string& key, const std::string& value) {
    if (key.empty()) throw ProtocolError("empty header key");
    if (key.find(':') != std::string::npos)
        throw ProtocolError("header key must not contain ':'");
    for (const std::string* part : {&key, &value})
        if (part->find('\n') != std::string::npos || part->find('\r') != std::string::npos)
            throw ProtocolError("header lines must not contain line breaks");
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(uint8_t(v >> 24));
    out.push_back(uint8_t(v >> 16));
    out.push_back(uint8_t(v >> 8));
    out.push_back(uint8_t(v));
}

} // namespace

bool known_msg_type(uint16_t raw) {
    switch (MsgType(raw)) {
    case MsgType::enroll:
    case MsgType::auth:
    case MsgType::identity:
    case MsgType::health:
    case MsgType::worker_score:
    case MsgType::error_reply:
    case MsgType::enroll_ok:
    case MsgType::auth_ok:
    case MsgType::identity_ok:
    case MsgType::health_ok:
    case MsgType::worker_score_ok:
        return true;
    }
    return false;
}

MsgType reply_type(MsgType request) {
    return MsgType(uint16_t(request) | 0x80);
}

const std::string& Envelope::require_header(const std::string& key) const {
    auto it = headers.find(key);
    if (it == headers.end()) throw ProtocolError("missing required header \"" + key + "\"");
    return it->second;
}

std::vector<uint8_t> encode_envelope(const Envelope& e) {
    if (!known_msg_type(uint16_t(e.type)))
        throw ProtocolError("unknown message type " + std::to_string(uint16_t(e.type)));

    std::string head;
    for (const auto& [key, value] : e.headers) {
        check_header(key, value);
        head += key;
        head += ':';
        head += value;
        head += '\n';
    }
    head += '\n';

    size_t body_len = 2 + head.size() + e.payload.size();
    if (body_len > max_frame_bytes) throw ProtocolError("frame exceeds the size cap");

    std::vector<uint8_t> out;
    out.reserve(4 + body_len);
    put_u32(out, uint32_t(body_len));
    out.push_back(uint8_t(uint16_t(e.type) >> 8));
    out.push_back(uint8_t(uint16_t(e.type)));
    out.insert(out.end(), head.begin(), head.end());
    out.insert(out.end(), e.payload.begin(), e.payload.end());
    return out;
}

Envelope decode_envelope(std::span<const uint8_t> frame) {
    if (frame.size() < 4) throw ProtocolError("frame shorter than its length prefix");
    uint32_t body_len = uint32_t(frame[0]) << 24 | uint32_t(frame[1]) << 16 |
                        uint32_t(frame[2]) << 8 | uint32_t(frame[3]);
    if (body_len > max_frame_bytes) throw ProtocolError("declared frame length exceeds the size cap");
    if (frame.size() - 4 != body_len)
        throw ProtocolError("frame length prefix does not match the body");
    return decode_envelope_body(frame.subspan(4));
}

Envelope decode_envelope_body(std::span<const uint8_t> body) {
    if (body.size() < 2) throw ProtocolError("frame body shorter than its type field");

    Envelope e;
    uint16_t raw_type = uint16_t(body[0]) << 8 | uint16_t(body[1]);
    if (!known_msg_type(raw_type))
        throw ProtocolError("unknown message type " + std::to_string(raw_type));
    e.type = MsgType(raw_type);

    size_t pos = 2;
    for (;;) {
        auto nl = std::find(body.begin() + long(pos), body.end(), uint8_t('\n'));
        if (nl == body.end()) throw ProtocolError("unterminated header block");
        std::string line(body.begin() + long(pos), nl);
        pos = size_t(nl - body.begin()) + 1;
        if (line.empty()) break;

        size_t colon = line.find(':');
        if (colon == std::string::npos)
            throw ProtocolError("header line without ':' separator");
        std::string key = line.substr(0, colon);
        std::string value = line.substr(colon + 1);
        check_header(key, value);
        if (!e.headers.emplace(std::move(key), std::move(value)).second)
            throw ProtocolError("duplicate header key");
    }

    e.payload.assign(body.begin() + long(pos), body.end());
    return e;
}

} // namespace hematch::net
