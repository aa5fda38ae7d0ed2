#pragma once

#include <span>
#include <vector>

#include "hematch/he/ciphertext.hpp"
#include "hematch/he/context.hpp"
#include "hematch/he/keys.hpp"

namespace hematch::he {

// Binary containers.  Every container starts with an 8-byte magic, a u32
// format version, the u64 params digest, and a backend byte; deserialization
// verifies the digest against the caller's context before touching any
// payload, so cross-parameter material is rejected up front (KeyError).
// Structural damage (bad magic, truncation, wrong version) raises FormatError.

std::vector<uint8_t> serialize_ciphertext(const Ciphertext& c);
Ciphertext deserialize_ciphertext(std::span<const uint8_t> data, const RingContext& ctx);

std::vector<uint8_t> serialize_secret_key(const SecretKey& k);
SecretKey deserialize_secret_key(std::span<const uint8_t> data, const RingContext& ctx);

std::vector<uint8_t> serialize_public_key(const PublicKey& k);
PublicKey deserialize_public_key(std::span<const uint8_t> data, const RingContext& ctx);

std::vector<uint8_t> serialize_relin_key(const RelinKey& k);
RelinKey deserialize_relin_key(std::span<const uint8_t> data, const RingContext& ctx);

std::vector<uint8_t> serialize_galois_keys(const GaloisKeys& k);
GaloisKeys deserialize_galois_keys(std::span<const uint8_t> data, const RingContext& ctx);

} // namespace hematch::he
