#pragma once

#include <functional>
#include <memory>
#include <thread>

#include "hematch/client/model.hpp"
#include "hematch/net/config.hpp"
#include "hematch/net/socket.hpp"
#include "hematch/net/wire.hpp"
#include "hematch/registry/registry.hpp"

namespace hematch::net {

using Handler = std::function<Envelope(const Envelope&)>;

// Thread-per-connection envelope server.  The accept loop runs on its own
// thread from construction; connection threads are detached and share
// ownership of the handler, so they stay valid during and after stop().
class Server {
public:
    Server(const Endpoint& bind_addr, Handler handler);
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;
    ~Server();

    uint16_t port() const { return st_->listener.port(); }

    void stop();   // wakes the accept loop; idempotent
    void join();   // blocks until the accept loop exits

private:
    struct State {
        State(const Endpoint& ep, Handler h) : listener(ep), handler(std::move(h)) {}
        TcpListener listener;
        Handler handler;
    };

    std::shared_ptr<State> st_;
    std::thread accept_thread_;
};

// Main authentication server: owns the registry and the identity map, fans
// authentication out to the configured workers, never loads secret or even
// evaluation-multiply key material (enrollment needs rotations only).
class MainService {
public:
    explicit MainService(ServiceConfig cfg);

    Envelope handle(const Envelope& request);
    uint64_t params_digest() const { return digest_; }
    size_t registered_count() const { return registry_->registered_count(); }

private:
    Envelope handle_enroll(const Envelope& request);
    Envelope handle_auth(const Envelope& request);
    Envelope handle_identity(const Envelope& request);

    ServiceConfig cfg_;
    std::shared_ptr<he::SlotBackend> backend_;
    uint64_t digest_ = 0;
    std::unique_ptr<registry::Registry> registry_;
    std::vector<Endpoint> worker_endpoints_;
};

// Cluster worker: loads the registry directory once at startup and scores
// whatever contiguous shard range each request assigns it.
class WorkerService {
public:
    explicit WorkerService(ServiceConfig cfg);

    Envelope handle(const Envelope& request);
    uint64_t params_digest() const { return digest_; }
    size_t shard_count() const { return shards_.size(); }

private:
    Envelope handle_score(const Envelope& request);

    ServiceConfig cfg_;
    std::shared_ptr<he::SlotBackend> backend_;
    uint64_t digest_ = 0;
    std::vector<std::shared_ptr<const registry::RegistryShard>> shards_;
    std::unique_ptr<auth::AuthEngine> engine_;
};

// Builds the service for the config's role and serves it on cfg.listen.
// Returns the running server; callers keep the returned service alive via
// the shared handler.
std::unique_ptr<Server> start_service(const ServiceConfig& cfg);

} // namespace hematch::net
