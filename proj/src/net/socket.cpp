#include "hematch/net/socket.hpp"

#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "hematch/common/errors.hpp"

namespace hematch::net {

namespace {

[[noreturn]] void fail_errno(const std::string& what) {
    throw ProtocolError(what + ": " + std::strerror(errno));
}

void send_all(int fd, const uint8_t* data, size_t len) {
    while (len > 0) {
        ssize_t n = ::send(fd, data, len, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            fail_errno("send failed");
        }
        data += n;
        len -= size_t(n);
    }
}

// Returns false only on EOF before the first byte.
bool recv_exact(int fd, uint8_t* data, size_t len, bool eof_ok) {
    size_t got = 0;
    while (got < len) {
        ssize_t n = ::recv(fd, data + got, len - got, 0);
        if (n < 0) {
            if (errno == EINTR) continue;
            fail_errno("recv failed");
        }
        if (n == 0) {
            if (got == 0 && eof_ok) return false;
            throw ProtocolError("connection closed mid-frame");
        }
        got += size_t(n);
    }
    return true;
}

} // namespace

Endpoint parse_endpoint(const std::string& s) {
    size_t colon = s.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == s.size())
        throw ConfigError("endpoint \"" + s + "\" is not host:port");
    Endpoint ep;
    ep.host = s.substr(0, colon);
    const std::string port_text = s.substr(colon + 1);
    size_t used = 0;
    unsigned long port = 0;
    try {
        port = std::stoul(port_text, &used);
    } catch (const std::exception&) {
        throw ConfigError("endpoint \"" + s + "\" has a malformed port");
    }
    if (used != port_text.size() || port > 65535)
        throw ConfigError("endpoint \"" + s + "\" has a malformed port");
    ep.port = uint16_t(port);
    return ep;
}

TcpConn& TcpConn::operator=(TcpConn&& other) noexcept {
    if (this != &other) {
        if (fd_ >= 0) ::close(fd_);
        fd_ = other.fd_;
        other.fd_ = -1;
    }
    return *this;
}

TcpConn::~TcpConn() {
    if (fd_ >= 0) ::close(fd_);
}

void TcpConn::send_envelope(const Envelope& e) {
    auto frame = encode_envelope(e);
    send_all(fd_, frame.data(), frame.size());
}

std::optional<Envelope> TcpConn::recv_envelope() {
    uint8_t prefix[4];
    if (!recv_exact(fd_, prefix, 4, true)) return std::nullopt;
    uint32_t body_len = uint32_t(prefix[0]) << 24 | uint32_t(prefix[1]) << 16 |
                        uint32_t(prefix[2]) << 8 | uint32_t(prefix[3]);
    if (body_len > max_frame_bytes)
        throw ProtocolError("declared frame length exceeds the size cap");
    std::vector<uint8_t> body(body_len);
    recv_exact(fd_, body.data(), body.size(), false);
    return decode_envelope_body(body);
}

void TcpConn::set_timeout(std::chrono::milliseconds timeout) {
    timeval tv{};
    tv.tv_sec = time_t(timeout.count() / 1000);
    tv.tv_usec = suseconds_t(timeout.count() % 1000) * 1000;
    if (::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv) != 0 ||
        ::setsockopt(fd_, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv) != 0)
        fail_errno("setsockopt failed");
}

namespace {

addrinfo* resolve(const Endpoint& ep, bool passive) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = AI_NUMERICSERV | (passive ? AI_PASSIVE : 0);
    addrinfo* res = nullptr;
    int rc = ::getaddrinfo(ep.host.c_str(), std::to_string(ep.port).c_str(), &hints, &res);
    if (rc != 0)
        throw ProtocolError("cannot resolve " + ep.str() + ": " + gai_strerror(rc));
    return res;
}

} // namespace

TcpConn tcp_connect(const Endpoint& ep) {
    addrinfo* res = resolve(ep, false);
    int fd = -1;
    std::string last_error = "no addresses";
    for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) {
            last_error = std::strerror(errno);
            continue;
        }
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
        last_error = std::strerror(errno);
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(res);
    if (fd < 0) throw ProtocolError("cannot connect to " + ep.str() + ": " + last_error);
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    return TcpConn(fd);
}

TcpListener::TcpListener(const Endpoint& bind_addr) {
    addrinfo* res = resolve(bind_addr, true);
    std::string last_error = "no addresses";
    for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
        fd_ = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd_ < 0) {
            last_error = std::strerror(errno);
            continue;
        }
        int one = 1;
        ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        if (::bind(fd_, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd_, 64) == 0) break;
        last_error = std::strerror(errno);
        ::close(fd_);
        fd_ = -1;
    }
    ::freeaddrinfo(res);
    if (fd_ < 0)
        throw ProtocolError("cannot listen on " + bind_addr.str() + ": " + last_error);

    sockaddr_storage addr{};
    socklen_t addr_len = sizeof addr;
    if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &addr_len) != 0)
        fail_errno("getsockname failed");
    if (addr.ss_family == AF_INET)
        port_ = ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
    else
        port_ = ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port);
}

TcpListener::~TcpListener() {
    if (fd_ >= 0) {
        ::shutdown(fd_, SHUT_RDWR);
        ::close(fd_);
        fd_ = -1;
    }
}

std::optional<TcpConn> TcpListener::accept() {
    for (;;) {
        int fd = ::accept(fd_, nullptr, nullptr);
        if (fd >= 0) {
            int one = 1;
            ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
            return TcpConn(fd);
        }
        if (errno == EINTR || errno == ECONNABORTED) continue;
        return std::nullopt; // closed or shut down
    }
}

void TcpListener::close() {
    // Shutdown only: it wakes a blocked accept without freeing the
    // descriptor, so a racing accept cannot touch a recycled fd.  The
    // destructor releases the fd once no accept can be in flight.
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

} // namespace hematch::net
