#include "hematch/net/wire.hpp"

#include <charconv>

#include "hematch/he/serialize.hpp"

namespace hematch::net {

std::string digest_hex(uint64_t digest) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(digest));
    return buf;
}

uint64_t parse_digest_hex(const std::string& hex) {
    if (hex.size() != 16) throw ProtocolError("params digest must be 16 hex digits");
    uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), value, 16);
    if (ec != std::errc{} || ptr != hex.data() + hex.size())
        throw ProtocolError("params digest must be 16 hex digits");
    return value;
}

void check_digest_header(const Envelope& request, uint64_t expected) {
    auto it = request.headers.find(hdr::digest);
    if (it == request.headers.end())
        throw KeyError("request carries no params digest");
    if (parse_digest_hex(it->second) != expected)
        throw KeyError("request params digest does not match this service");
}

uint64_t parse_index_header(const std::string& text) {
    uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value, 10);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
        throw ProtocolError("malformed index \"" + text + "\"");
    return value;
}

namespace {

void put_u64(std::vector<uint8_t>& out, uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8) out.push_back(uint8_t(v >> shift));
}

uint64_t take_u64(std::span<const uint8_t> data, size_t& pos) {
    if (data.size() - pos < 8) throw ProtocolError("group payload truncated");
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = v << 8 | data[pos + size_t(i)];
    pos += 8;
    return v;
}

} // namespace

void encode_groups(std::span<const auth::CompressedGroup> groups, Envelope& out) {
    std::string list;
    for (const auto& g : groups) {
        if (!list.empty()) list += ',';
        list += std::to_string(g.group_index);
        out.headers[hdr::occupancy_prefix + std::to_string(g.group_index)] =
            g.valid_slots.to_hex();
        auto blob = he::serialize_ciphertext(g.result);
        put_u64(out.payload, blob.size());
        out.payload.insert(out.payload.end(), blob.begin(), blob.end());
    }
    out.headers[hdr::groups] = list;
}

std::vector<auth::CompressedGroup> decode_groups(const Envelope& e, const he::RingContext& ctx,
                                                 size_t slot_count) {
    const std::string& list = e.require_header(hdr::groups);
    std::vector<uint32_t> indices;
    if (!list.empty()) {
        size_t pos = 0;
        while (pos <= list.size()) {
            size_t comma = list.find(',', pos);
            std::string item = list.substr(pos, comma == std::string::npos ? comma : comma - pos);
            indices.push_back(uint32_t(parse_index_header(item)));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
    }

    std::vector<auth::CompressedGroup> groups;
    groups.reserve(indices.size());
    size_t pos = 0;
    std::span<const uint8_t> payload(e.payload);
    for (uint32_t index : indices) {
        auth::CompressedGroup g;
        g.group_index = index;
        g.valid_slots = DynBitset::from_hex(
            e.require_header(hdr::occupancy_prefix + std::to_string(index)), slot_count);
        uint64_t len = take_u64(payload, pos);
        if (payload.size() - pos < len) throw ProtocolError("group payload truncated");
        g.result = he::deserialize_ciphertext(payload.subspan(pos, size_t(len)), ctx);
        pos += size_t(len);
        groups.push_back(std::move(g));
    }
    if (pos != payload.size()) throw ProtocolError("trailing bytes after the last group");
    return groups;
}

Envelope make_error_reply(const Error& e) {
    Envelope reply;
    reply.type = MsgType::error_reply;
    reply.headers[hdr::error] = error_kind_name(e.kind());
    if (e.kind() == ErrorKind::worker_fault) reply.headers[hdr::retryable] = "1";
    const std::string what = e.what();
    reply.payload.assign(what.begin(), what.end());
    return reply;
}

void throw_reported_error(const std::string& kind_name, const std::string& message) {
    static const std::pair<ErrorKind, void (*)(const std::string&)> table[] = {
        {ErrorKind::param, [](const std::string& m) { throw ParamError(m); }},
        {ErrorKind::shape, [](const std::string& m) { throw ShapeError(m); }},
        {ErrorKind::alignment, [](const std::string& m) { throw AlignmentError(m); }},
        {ErrorKind::depth, [](const std::string& m) { throw DepthError(m); }},
        {ErrorKind::key, [](const std::string& m) { throw KeyError(m); }},
        {ErrorKind::format, [](const std::string& m) { throw FormatError(m); }},
        {ErrorKind::conflict, [](const std::string& m) { throw ConflictError(m); }},
        {ErrorKind::not_found, [](const std::string& m) { throw NotFoundError(m); }},
        {ErrorKind::bounds, [](const std::string& m) { throw BoundsError(m); }},
        {ErrorKind::config, [](const std::string& m) { throw ConfigError(m); }},
        {ErrorKind::protocol, [](const std::string& m) { throw ProtocolError(m); }},
        {ErrorKind::worker_fault, [](const std::string& m) { throw WorkerFault(m); }},
        {ErrorKind::aggregation, [](const std::string& m) { throw AggregationError(m); }},
    };
    for (const auto& [kind, rethrow] : table) {
        if (kind_name != error_kind_name(kind)) continue;
        // The transported what() already starts with the kind name the
        // constructor would prepend; strip it to avoid doubling up.
        const std::string prefix = kind_name + ": ";
        rethrow(message.starts_with(prefix) ? message.substr(prefix.size()) : message);
    }
    throw ProtocolError("peer reported an unknown error kind \"" + kind_name + "\": " + message);
}

Envelope expect_reply(Envelope reply, MsgType expected) {
    if (reply.type == MsgType::error_reply) {
        std::string message(reply.payload.begin(), reply.payload.end());
        throw_reported_error(reply.require_header(hdr::error), message);
    }
    if (reply.type != expected)
        throw ProtocolError("unexpected reply type " + std::to_string(uint16_t(reply.type)));
    return reply;
}

} // namespace hematch::net
