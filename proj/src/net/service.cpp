#include "hematch/net/service.hpp"

#include "hematch/cluster/orchestrator.hpp"
#include "hematch/common/binio.hpp"
#include "hematch/he/serialize.hpp"
#include "hematch/net/client.hpp"

namespace hematch::net {

namespace {

void serve_connection(std::shared_ptr<const Handler> handler, TcpConn conn) {
    for (;;) {
        Envelope request;
        try {
            auto received = conn.recv_envelope();
            if (!received) return; // clean close
            request = std::move(*received);
        } catch (const Error& e) {
            // Framing is broken; report once and drop the stream.
            try {
                conn.send_envelope(make_error_reply(e));
            } catch (...) {
            }
            return;
        }

        Envelope reply;
        try {
            reply = (*handler)(request);
        } catch (const Error& e) {
            reply = make_error_reply(e);
        } catch (const std::exception& e) {
            reply = make_error_reply(
                ProtocolError(std::string("internal failure: ") + e.what()));
        }
        try {
            conn.send_envelope(reply);
        } catch (...) {
            return;
        }
    }
}

} // namespace

Server::Server(const Endpoint& bind_addr, Handler handler)
    : st_(std::make_shared<State>(bind_addr, std::move(handler))) {
    accept_thread_ = std::thread([st = st_] {
        auto shared_handler = std::make_shared<const Handler>(st->handler);
        while (auto conn = st->listener.accept()) {
            std::thread(serve_connection, shared_handler, std::move(*conn)).detach();
        }
    });
}

Server::~Server() {
    stop();
    join();
}

void Server::stop() { st_->listener.close(); }

void Server::join() {
    if (accept_thread_.joinable()) accept_thread_.join();
}

MainService::MainService(ServiceConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.role != Role::main_server)
        throw ConfigError("MainService needs a main config");
    backend_ = he::SlotBackend::create(params_for_profile(cfg_.profile), cfg_.backend);
    digest_ = backend_->params_digest();

    auto galois = he::deserialize_galois_keys(read_file(cfg_.keys.galois), *backend_->context());

    const std::filesystem::path dir = cfg_.registry_dir;
    if (std::filesystem::exists(dir / "identities.txt"))
        registry_ = registry::Registry::load(dir, backend_, std::move(galois));
    else
        registry_ = std::make_unique<registry::Registry>(backend_, std::move(galois));

    for (const auto& w : cfg_.workers) worker_endpoints_.push_back(parse_endpoint(w));
}

Envelope MainService::handle(const Envelope& request) {
    switch (request.type) {
    case MsgType::enroll: return handle_enroll(request);
    case MsgType::auth: return handle_auth(request);
    case MsgType::identity: return handle_identity(request);
    case MsgType::health: {
        Envelope reply;
        reply.type = MsgType::health_ok;
        reply.headers[hdr::role] = role_name(Role::main_server);
        reply.headers[hdr::registered] = std::to_string(registry_->registered_count());
        reply.headers[hdr::shards] = std::to_string(registry_->shard_count());
        return reply;
    }
    default:
        throw ProtocolError("message type " + std::to_string(uint16_t(request.type)) +
                            " is not served by the main role");
    }
}

Envelope MainService::handle_enroll(const Envelope& request) {
    check_digest_header(request, digest_);
    const std::string& user = request.require_header(hdr::user);
    auto c_u = he::deserialize_ciphertext(request.payload, *backend_->context());
    uint64_t index = registry_->enroll(c_u, user);
    registry_->persist(cfg_.registry_dir);

    Envelope reply;
    reply.type = MsgType::enroll_ok;
    reply.headers[hdr::index] = std::to_string(index);
    return reply;
}

Envelope MainService::handle_auth(const Envelope& request) {
    check_digest_header(request, digest_);
    auto c_u = he::deserialize_ciphertext(request.payload, *backend_->context());

    Envelope reply;
    reply.type = MsgType::auth_ok;

    const size_t shard_count = registry_->shard_count();
    if (shard_count == 0) {
        encode_groups({}, reply); // nothing registered: all-invalid occupancy
        return reply;
    }
    if (worker_endpoints_.empty())
        throw ConfigError("no workers configured for authentication");

    auto plan = cluster::make_plan(shard_count, worker_endpoints_.size());
    auto call = remote_worker_call(worker_endpoints_, cfg_.token, digest_, backend_,
                                   cfg_.worker_deadline);
    auto groups = cluster::cluster_auth(plan, c_u, call, *backend_, cfg_.worker_deadline);
    encode_groups(groups, reply);
    return reply;
}

Envelope MainService::handle_identity(const Envelope& request) {
    uint64_t index = parse_index_header(request.require_header(hdr::index));
    Envelope reply;
    reply.type = MsgType::identity_ok;
    reply.headers[hdr::user] = registry_->lookup_identity(index);
    return reply;
}

WorkerService::WorkerService(ServiceConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.role != Role::worker)
        throw ConfigError("WorkerService needs a worker config");
    backend_ = he::SlotBackend::create(params_for_profile(cfg_.profile), cfg_.backend);
    digest_ = backend_->params_digest();

    auto galois = he::deserialize_galois_keys(read_file(cfg_.keys.galois), *backend_->context());
    auto relin = he::deserialize_relin_key(read_file(cfg_.keys.relin), *backend_->context());
    auto model = client::load_model(cfg_.model);

    const std::filesystem::path dir = cfg_.registry_dir;
    if (std::filesystem::exists(dir / "identities.txt")) {
        auto reg = registry::Registry::load(dir, backend_, galois);
        shards_ = reg->snapshot();
    }
    engine_ = std::make_unique<auth::AuthEngine>(backend_, std::move(relin), std::move(galois),
                                                 model.fc16.bias, model.fc1_weights);
}

Envelope WorkerService::handle(const Envelope& request) {
    switch (request.type) {
    case MsgType::worker_score: return handle_score(request);
    case MsgType::health: {
        Envelope reply;
        reply.type = MsgType::health_ok;
        reply.headers[hdr::role] = role_name(Role::worker);
        reply.headers[hdr::shards] = std::to_string(shards_.size());
        return reply;
    }
    default:
        throw ProtocolError("message type " + std::to_string(uint16_t(request.type)) +
                            " is not served by the worker role");
    }
}

Envelope WorkerService::handle_score(const Envelope& request) {
    if (request.require_header(hdr::token) != cfg_.token)
        throw ProtocolError("worker token mismatch");
    check_digest_header(request, digest_);

    uint64_t begin = parse_index_header(request.require_header(hdr::shard_begin));
    uint64_t end = parse_index_header(request.require_header(hdr::shard_end));
    if (begin > end || end > shards_.size())
        throw BoundsError("shard range " + std::to_string(begin) + ".." + std::to_string(end) +
                          " exceeds the " + std::to_string(shards_.size()) + " loaded shards");

    auto c_u = he::deserialize_ciphertext(request.payload, *backend_->context());
    auto groups = engine_->full_auth(
        c_u, std::span(shards_).subspan(size_t(begin), size_t(end - begin)));

    Envelope reply;
    reply.type = MsgType::worker_score_ok;
    encode_groups(groups, reply);
    return reply;
}

std::unique_ptr<Server> start_service(const ServiceConfig& cfg) {
    Handler handler;
    switch (cfg.role) {
    case Role::main_server: {
        auto svc = std::make_shared<MainService>(cfg);
        handler = [svc](const Envelope& e) { return svc->handle(e); };
        break;
    }
    case Role::worker: {
        auto svc = std::make_shared<WorkerService>(cfg);
        handler = [svc](const Envelope& e) { return svc->handle(e); };
        break;
    }
    case Role::client_tool:
        throw ConfigError("a client-tool config does not describe a server");
    }
    return std::make_unique<Server>(parse_endpoint(cfg.listen), std::move(handler));
}

} // namespace hematch::net
