#include "hematch/net/client.hpp"

#include "hematch/he/serialize.hpp"

namespace hematch::net {

namespace {

Envelope round_trip(const Endpoint& ep, const Envelope& request, MsgType expected) {
    TcpConn conn = tcp_connect(ep);
    conn.send_envelope(request);
    auto reply = conn.recv_envelope();
    if (!reply) throw ProtocolError("peer closed the connection without replying");
    return expect_reply(std::move(*reply), expected);
}

} // namespace

uint64_t request_enroll(const Endpoint& main, uint64_t digest, const he::Ciphertext& c_u,
                        const std::string& user_id) {
    Envelope request;
    request.type = MsgType::enroll;
    request.headers[hdr::digest] = digest_hex(digest);
    request.headers[hdr::user] = user_id;
    request.payload = he::serialize_ciphertext(c_u);
    Envelope reply = round_trip(main, request, MsgType::enroll_ok);
    return parse_index_header(reply.require_header(hdr::index));
}

AuthResult request_auth(const Endpoint& main, uint64_t digest, const he::Ciphertext& c_u,
                        const he::SlotBackend& backend) {
    Envelope request;
    request.type = MsgType::auth;
    request.headers[hdr::digest] = digest_hex(digest);
    request.payload = he::serialize_ciphertext(c_u);
    Envelope reply = round_trip(main, request, MsgType::auth_ok);

    auto groups = decode_groups(reply, *backend.context(), backend.params().slot_count);
    AuthResult out;
    for (size_t g = 0; g < groups.size(); ++g) {
        if (groups[g].group_index != g)
            throw ProtocolError("auth reply groups are not dense from zero");
        out.groups.push_back(std::move(groups[g].result));
        out.valid.push_back(std::move(groups[g].valid_slots));
    }
    return out;
}

std::string request_identity(const Endpoint& main, uint64_t global_index) {
    Envelope request;
    request.type = MsgType::identity;
    request.headers[hdr::index] = std::to_string(global_index);
    Envelope reply = round_trip(main, request, MsgType::identity_ok);
    return reply.require_header(hdr::user);
}

HealthInfo request_health(const Endpoint& ep) {
    Envelope request;
    request.type = MsgType::health;
    Envelope reply = round_trip(ep, request, MsgType::health_ok);
    HealthInfo info;
    info.role = reply.require_header(hdr::role);
    if (auto it = reply.headers.find(hdr::registered); it != reply.headers.end())
        info.registered = parse_index_header(it->second);
    if (auto it = reply.headers.find(hdr::shards); it != reply.headers.end())
        info.shards = parse_index_header(it->second);
    return info;
}

cluster::WorkerCall remote_worker_call(std::vector<Endpoint> endpoints, std::string token,
                                       uint64_t digest,
                                       std::shared_ptr<he::SlotBackend> backend,
                                       std::chrono::milliseconds io_timeout) {
    return [endpoints = std::move(endpoints), token = std::move(token), digest,
            backend = std::move(backend),
            io_timeout](size_t worker_index, const cluster::ShardRange& range,
                        const he::Ciphertext& c_u) {
        if (worker_index >= endpoints.size())
            throw ProtocolError("no endpoint for worker " + std::to_string(worker_index + 1));

        Envelope request;
        request.type = MsgType::worker_score;
        request.headers[hdr::token] = token;
        request.headers[hdr::digest] = digest_hex(digest);
        request.headers[hdr::shard_begin] = std::to_string(range.begin);
        request.headers[hdr::shard_end] = std::to_string(range.end);
        request.payload = he::serialize_ciphertext(c_u);

        TcpConn conn = tcp_connect(endpoints[worker_index]);
        // A small cushion past the orchestrator deadline keeps a wedged
        // socket from pinning this thread forever.
        conn.set_timeout(io_timeout + std::chrono::milliseconds(2000));
        conn.send_envelope(request);
        auto reply = conn.recv_envelope();
        if (!reply) throw ProtocolError("worker closed the connection without replying");
        Envelope ok = expect_reply(std::move(*reply), MsgType::worker_score_ok);
        return decode_groups(ok, *backend->context(), backend->params().slot_count);
    };
}

} // namespace hematch::net
