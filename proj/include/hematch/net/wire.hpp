#pragma once

#include <span>
#include <string>
#include <vector>

#include "hematch/auth/engine.hpp"
#include "hematch/common/errors.hpp"
#include "hematch/net/envelope.hpp"

namespace hematch::net {

// Header keys shared by both ends of the protocol.
namespace hdr {
inline constexpr const char* digest = "digest";         // params digest, hex
inline constexpr const char* user = "user";             // enroll / identity reply
inline constexpr const char* index = "index";           // global user index
inline constexpr const char* token = "token";           // worker shared secret
inline constexpr const char* shard_begin = "shard-begin";
inline constexpr const char* shard_end = "shard-end";   // exclusive
inline constexpr const char* groups = "groups";         // comma list of group indices
inline constexpr const char* occupancy_prefix = "occupancy-"; // + group index, hex bitset
inline constexpr const char* error = "error";           // error kind name
inline constexpr const char* retryable = "retryable";   // "1" when retrying may help
inline constexpr const char* role = "role";             // health reply
inline constexpr const char* registered = "registered"; // health reply
inline constexpr const char* shards = "shards";         // health reply
}

std::string digest_hex(uint64_t digest);
uint64_t parse_digest_hex(const std::string& hex); // ProtocolError on malformed input

// Checks the request's digest header against the service's params before
// anything touches the payload; KeyError on absence or mismatch.
void check_digest_header(const Envelope& request, uint64_t expected);

uint64_t parse_index_header(const std::string& text); // ProtocolError on malformed input

// Compressed-result transfer: the "groups" header lists group indices in
// payload order, each group's validity bitmap rides in an occupancy-<g>
// header as hex, and the payload holds the ciphertext blobs, each behind a
// u64 BE length.
void encode_groups(std::span<const auth::CompressedGroup> groups, Envelope& out);
std::vector<auth::CompressedGroup> decode_groups(const Envelope& e, const he::RingContext& ctx,
                                                 size_t slot_count);

// error_reply envelope carrying the kind name, the message, and whether a
// retry can help (worker faults only).
Envelope make_error_reply(const Error& e);

// Returns the reply when its type matches; rethrows the transported error
// for error replies; ProtocolError for anything else.
Envelope expect_reply(Envelope reply, MsgType expected);

// Rebuilds the typed exception a peer reported.
[[noreturn]] void throw_reported_error(const std::string& kind_name, const std::string& message);

} // namespace hematch::net
