#pragma once

#include <chrono>
#include <optional>
#include <string>

#include "hematch/net/envelope.hpp"

namespace hematch::net {

struct Endpoint {
    std::string host;
    uint16_t port = 0;

    std::string str() const { return host + ":" + std::to_string(port); }
};

// "host:port" with a numeric port; ConfigError otherwise.
Endpoint parse_endpoint(const std::string& s);

// One connected stream socket carrying framed envelopes.  Move-only.
class TcpConn {
public:
    explicit TcpConn(int fd) : fd_(fd) {}
    TcpConn(TcpConn&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
    TcpConn& operator=(TcpConn&& other) noexcept;
    TcpConn(const TcpConn&) = delete;
    TcpConn& operator=(const TcpConn&) = delete;
    ~TcpConn();

    void send_envelope(const Envelope& e);

    // One complete frame, or nullopt on a clean close at a frame boundary.
    // ProtocolError on truncation, oversized frames, or socket failure.
    std::optional<Envelope> recv_envelope();

    // Applies to both directions; a blocked read or write past the deadline
    // fails with ProtocolError.
    void set_timeout(std::chrono::milliseconds timeout);

    int fd() const { return fd_; }

private:
    int fd_ = -1;
};

// ProtocolError when the endpoint cannot be resolved or reached.
TcpConn tcp_connect(const Endpoint& ep);

// Listening socket; port 0 binds an ephemeral port, port() reports the
// actual one.  close() wakes a blocked accept, which then returns nullopt;
// the descriptor itself is released by the destructor, which must only run
// once no accept call can still be in flight.
class TcpListener {
public:
    explicit TcpListener(const Endpoint& bind_addr);
    TcpListener(const TcpListener&) = delete;
    TcpListener& operator=(const TcpListener&) = delete;
    ~TcpListener();

    uint16_t port() const { return port_; }
    std::optional<TcpConn> accept();
    void close();

private:
    int fd_ = -1;
    uint16_t port_ = 0;
};

} // namespace hematch::net
