#pragma once

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <thread>

#include "mpc3/transport.hpp"

namespace mpc3 {

// Framed TCP transport for one party. Mesh convention: every party listens
// on its own endpoint and dials every higher-numbered peer, so P0 dials P1
// and P2, P1 dials P2. A hello frame carries (role, session); the acceptor
// rejects role collisions.

struct Endpoint {
    std::string host = "127.0.0.1";
    int port = 0;
};

inline Endpoint parse_endpoint(const std::string& text) {
    auto colon = text.rfind(':');
    if (colon == std::string::npos) throw ConfigError("endpoint must be host:port: " + text);
    Endpoint e;
    e.host = text.substr(0, colon);
    if (e.host.empty()) e.host = "127.0.0.1";
    e.port = std::stoi(text.substr(colon + 1));
    return e;
}

class SocketChannel : public Channel {
  public:
    SocketChannel(int fd, u64 session) : fd_(fd), session_(session) {
        int one = 1;
        setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    }

    ~SocketChannel() override {
        if (fd_ >= 0) ::close(fd_);
    }

    void send_bytes(const Bytes& payload) override {
        Bytes frame = frame_header(session_, send_seq_++, static_cast<u32>(payload.size()));
        frame.insert(frame.end(), payload.begin(), payload.end());
        write_all(frame.data(), frame.size());
    }

    Bytes recv_bytes() override {
        Bytes header(kFrameHeaderSize);
        read_all(header.data(), header.size());
        FrameHeader fh = parse_frame_header(header);
        if (fh.session != session_) throw TransportError("session id mismatch");
        if (fh.sequence != recv_seq_++) throw TransportError("out-of-order frame");
        Bytes payload(fh.payload_len);
        read_all(payload.data(), payload.size());
        return payload;
    }

    void shutdown() override {
        if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
    }

  private:
    // Bounded-chunk writes so multi-megabyte tensors stream without one
    // giant syscall.
    static constexpr size_t kChunk = 1 << 20;

    void write_all(const u8* data, size_t len) {
        size_t off = 0;
        while (off < len) {
            ssize_t n = ::send(fd_, data + off, std::min(kChunk, len - off), MSG_NOSIGNAL);
            if (n <= 0) throw TransportError("send failed (peer gone?)");
            off += static_cast<size_t>(n);
        }
    }

    void read_all(u8* data, size_t len) {
        size_t off = 0;
        while (off < len) {
            ssize_t n = ::recv(fd_, data + off, len - off, 0);
            if (n == 0) throw TransportError("peer closed the connection");
            if (n < 0) throw TransportError("recv failed");
            off += static_cast<size_t>(n);
        }
    }

    int fd_;
    u64 session_;
    u64 send_seq_ = 0;
    u64 recv_seq_ = 0;
};

namespace detail {

inline int dial(const Endpoint& ep, int attempts = 100) {
    for (int tries = 0; tries < attempts; ++tries) {
        int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd < 0) throw TransportError("socket() failed");
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(static_cast<uint16_t>(ep.port));
        if (inet_pton(AF_INET, ep.host.c_str(), &addr.sin_addr) != 1) {
            hostent* he = gethostbyname(ep.host.c_str());
            if (!he) {
                ::close(fd);
                throw TransportError("cannot resolve " + ep.host);
            }
            std::memcpy(&addr.sin_addr, he->h_addr, sizeof(addr.sin_addr));
        }
        if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0) return fd;
        ::close(fd);
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
    throw TransportError("connection to " + ep.host + ":" + std::to_string(ep.port) +
                         " timed out");
}

inline int listen_on(const Endpoint& ep) {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw TransportError("socket() failed");
    int one = 1;
    setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = INADDR_ANY;
    addr.sin_port = htons(static_cast<uint16_t>(ep.port));
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        ::close(fd);
        throw TransportError("bind to port " + std::to_string(ep.port) +
                             " failed (already in use?)");
    }
    if (::listen(fd, 4) != 0) {
        ::close(fd);
        throw TransportError("listen failed");
    }
    return fd;
}

inline void send_hello(int fd, PartyRole role, u64 session) {
    Bytes hello;
    put_u32(hello, 0x334F4C48); // "HLO3"
    put_u32(hello, static_cast<u32>(role_index(role)));
    put_u64(hello, session);
    size_t off = 0;
    while (off < hello.size()) {
        ssize_t n = ::send(fd, hello.data() + off, hello.size() - off, MSG_NOSIGNAL);
        if (n <= 0) throw TransportError("hello send failed");
        off += static_cast<size_t>(n);
    }
}

inline std::pair<PartyRole, u64> recv_hello(int fd) {
    Bytes hello(16);
    size_t off = 0;
    while (off < hello.size()) {
        ssize_t n = ::recv(fd, hello.data() + off, hello.size() - off, 0);
        if (n <= 0) throw TransportError("hello recv failed");
        off += static_cast<size_t>(n);
    }
    ByteReader r(hello);
    if (r.get_u32() != 0x334F4C48) throw TransportError("bad hello magic");
    u32 role = r.get_u32();
    if (role > 2) throw TransportError("bad hello role");
    u64 session = r.get_u64();
    return {static_cast<PartyRole>(role), session};
}

} // namespace detail

// Builds this party's channel set over TCP. `endpoints[i]` is the listen
// endpoint of party i. Blocks until the full mesh is up.
inline ChannelSet socket_mesh(PartyRole role, const std::array<Endpoint, 3>& endpoints,
                              u64 session) {
    ChannelSet set;
    const int me = role_index(role);

    int listener = -1;
    if (me > 0) listener = detail::listen_on(endpoints[static_cast<size_t>(me)]);

    // Dial the higher-numbered peers.
    for (int peer = me + 1; peer < 3; ++peer) {
        int fd = detail::dial(endpoints[static_cast<size_t>(peer)]);
        detail::send_hello(fd, role, session);
        set.to[static_cast<size_t>(peer)] = std::make_shared<SocketChannel>(fd, session);
    }

    // Accept the lower-numbered peers.
    std::array<bool, 3> seen{};
    for (int expected = 0; expected < me; ++expected) {
        int fd = ::accept(listener, nullptr, nullptr);
        if (fd < 0) throw TransportError("accept failed");
        auto [peer_role, peer_session] = detail::recv_hello(fd);
        if (peer_session != session) throw TransportError("peer session mismatch");
        int idx = role_index(peer_role);
        if (idx >= me || seen[static_cast<size_t>(idx)])
            throw TransportError(std::string("role collision: second ") + role_name(peer_role));
        seen[static_cast<size_t>(idx)] = true;
        set.to[static_cast<size_t>(idx)] = std::make_shared<SocketChannel>(fd, session);
    }
    if (listener >= 0) ::close(listener);
    return set;
}

} // namespace mpc3
