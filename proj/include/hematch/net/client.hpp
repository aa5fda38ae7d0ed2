#pragma once

#include <memory>
#include <string>
#include <vector>

#include "hematch/cluster/orchestrator.hpp"
#include "hematch/net/socket.hpp"
#include "hematch/net/wire.hpp"

namespace hematch::net {

// One-shot request helpers; each opens a connection, exchanges one envelope
// pair, and maps error replies back to typed exceptions.

uint64_t request_enroll(const Endpoint& main, uint64_t digest, const he::Ciphertext& c_u,
                        const std::string& user_id);

// The group ciphertexts and their validity bitmaps, positionally aligned
// and verified dense (group g at position g), ready for decide_all.
struct AuthResult {
    std::vector<he::Ciphertext> groups;
    std::vector<DynBitset> valid;
};
AuthResult request_auth(const Endpoint& main, uint64_t digest, const he::Ciphertext& c_u,
                        const he::SlotBackend& backend);

std::string request_identity(const Endpoint& main, uint64_t global_index);

struct HealthInfo {
    std::string role;
    uint64_t registered = 0; // main only
    uint64_t shards = 0;
};
HealthInfo request_health(const Endpoint& ep);

// Worker call for the orchestrator: scores range r on endpoints[i] via
// WORKER_SCORE.  Connection failures and error replies surface as typed
// exceptions for fan_out to wrap into WorkerFault.
cluster::WorkerCall remote_worker_call(std::vector<Endpoint> endpoints, std::string token,
                                       uint64_t digest,
                                       std::shared_ptr<he::SlotBackend> backend,
                                       std::chrono::milliseconds io_timeout);

} // namespace hematch::net
