#include "dflow/socket_transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <thread>

#include "dflow/errors.hpp"

namespace dflow {

namespace {

bool write_all(int fd, const void* data, size_t len) {
    const char* p = static_cast<const char*>(data);
    while (len > 0) {
        ssize_t n = ::send(fd, p, len, MSG_NOSIGNAL);
        if (n <= 0) return false;
        p += n;
        len -= static_cast<size_t>(n);
    }
    return true;
}

bool read_all(int fd, void* data, size_t len) {
    char* p = static_cast<char*>(data);
    while (len > 0) {
        ssize_t n = ::recv(fd, p, len, 0);
        if (n <= 0) return false;
        p += n;
        len -= static_cast<size_t>(n);
    }
    return true;
}

bool write_frame(int fd, const void* data, std::uint32_t len) {
    std::uint32_t be = htonl(len);
    if (!write_all(fd, &be, 4)) return false;
    return write_all(fd, data, len);
}

constexpr std::uint32_t kMaxFrame = 1u << 30;

}  // namespace

SocketTransport::SocketTransport(std::uint64_t envelope_bytes, const std::string& host)
    : envelope_bytes_(envelope_bytes), host_(host), epoch_(std::chrono::steady_clock::now()) {}

SocketTransport::~SocketTransport() { shutdown(); }

double SocketTransport::now() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - epoch_).count();
}

void SocketTransport::register_endpoint(const std::string& id, const std::string& site,
                                        Handler handler) {
    auto ep = std::make_unique<Endpoint>();
    ep->site = site;
    ep->handler = std::move(handler);

    ep->listen_fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (ep->listen_fd < 0) throw Error("socket() failed");
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = 0;
    if (::inet_pton(AF_INET, host_.c_str(), &addr.sin_addr) != 1)
        throw Error("bad host: " + host_);
    if (::bind(ep->listen_fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
        throw Error("bind() failed for endpoint " + id);
    socklen_t len = sizeof addr;
    ::getsockname(ep->listen_fd, reinterpret_cast<sockaddr*>(&addr), &len);
    ep->port = ntohs(addr.sin_port);
    if (::listen(ep->listen_fd, 16) != 0) throw Error("listen() failed for endpoint " + id);

    Endpoint* raw = ep.get();
    ep->accept_thread = std::thread([this, raw] { accept_loop(raw); });

    std::lock_guard<std::mutex> lock(mutex_);
    endpoints_[id] = std::move(ep);
}

void SocketTransport::unregister_endpoint(const std::string& id) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = endpoints_.find(id);
    if (it != endpoints_.end()) it->second->open = false;
}

bool SocketTransport::has_endpoint(const std::string& id) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = endpoints_.find(id);
    return it != endpoints_.end() && it->second->open;
}

std::string SocketTransport::site_of(const std::string& id) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = endpoints_.find(id);
    if (it == endpoints_.end()) throw EndpointUnknownError(id);
    return it->second->site;
}

std::string SocketTransport::address_of(const std::string& id) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = endpoints_.find(id);
    if (it == endpoints_.end()) throw EndpointUnknownError(id);
    return host_ + ":" + std::to_string(it->second->port);
}

void SocketTransport::accept_loop(Endpoint* ep) {
    while (true) {
        int fd = ::accept(ep->listen_fd, nullptr, nullptr);
        if (fd < 0) return;  // listener closed
        int one = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
        std::lock_guard<std::mutex> lock(mutex_);
        ep->readers.emplace_back([this, ep, fd] { reader_loop(ep, fd); });
    }
}

void SocketTransport::reader_loop(Endpoint* ep, int fd) {
    while (true) {
        std::uint32_t be = 0;
        if (!read_all(fd, &be, 4)) break;
        std::uint32_t hlen = ntohl(be);
        if (hlen == 0 || hlen > kMaxFrame) break;
        std::string header(hlen, '\0');
        if (!read_all(fd, header.data(), hlen)) break;

        nlohmann::json h;
        try {
            h = nlohmann::json::parse(header);
        } catch (const nlohmann::json::exception&) {
            break;
        }
        Message msg;
        msg.kind = static_cast<MsgKind>(h.at("kind").get<int>());
        msg.correlation_id = h.at("corr").get<std::uint64_t>();
        msg.run_id = h.value("run", std::string{});
        msg.from = h.at("from").get<std::string>();
        msg.to = h.at("to").get<std::string>();
        msg.ref = h.value("ref", std::string{});
        msg.error = h.value("error", false);
        msg.body = h.value("body", nlohmann::json::object());

        bool ok = true;
        for (const auto& size : h.value("payload_sizes", std::vector<std::uint64_t>{})) {
            if (size > kMaxFrame) {
                ok = false;
                break;
            }
            std::uint32_t pbe = 0;
            if (!read_all(fd, &pbe, 4)) {
                ok = false;
                break;
            }
            std::uint32_t plen = ntohl(pbe);
            if (plen != size) {
                ok = false;
                break;
            }
            std::vector<std::uint8_t> bytes(plen);
            if (plen && !read_all(fd, bytes.data(), plen)) {
                ok = false;
                break;
            }
            msg.payloads.push_back(make_payload(std::move(bytes)));
        }
        if (!ok) break;

        {
            std::lock_guard<std::mutex> m(metrics_mutex_);
            metrics_.on_receive(envelope_bytes_ + msg.payload_size());
        }
        if (!ep->open || closed_) break;
        std::lock_guard<std::mutex> serial(ep->handler_mutex);
        try {
            ep->handler(msg, now());
        } catch (...) {
            break;  // a throwing handler on a reader thread ends the connection
        }
    }
    ::close(fd);
}

int SocketTransport::connect_to(const std::string& endpoint_id) {
    auto it = endpoints_.find(endpoint_id);
    if (it == endpoints_.end() || !it->second->open) throw EndpointUnknownError(endpoint_id);
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw ConnectionLostError("socket() failed");
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(it->second->port));
    ::inet_pton(AF_INET, host_.c_str(), &addr.sin_addr);
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
        ::close(fd);
        throw ConnectionLostError("connect to " + endpoint_id + " failed");
    }
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    return fd;
}

std::uint64_t SocketTransport::send(Message msg) {
    if (msg.correlation_id == 0) msg.correlation_id = next_correlation_.fetch_add(1);

    std::string from_site, to_site;
    int fd = -1;
    std::mutex* conn_mutex = nullptr;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto from_it = endpoints_.find(msg.from);
        if (from_it == endpoints_.end()) throw EndpointUnknownError(msg.from);
        from_site = from_it->second->site;
        auto to_it = endpoints_.find(msg.to);
        if (to_it == endpoints_.end() || !to_it->second->open)
            throw EndpointUnknownError(msg.to);
        to_site = to_it->second->site;

        auto key = std::make_pair(msg.from, msg.to);
        auto cit = connections_.find(key);
        if (cit == connections_.end()) {
            fd = connect_to(msg.to);  // one connection per pair, fail-fast
            connections_[key] = fd;
            conn_mutexes_[key] = std::make_unique<std::mutex>();
        } else {
            fd = cit->second;
        }
        conn_mutex = conn_mutexes_[key].get();
    }

    nlohmann::json h{{"kind", static_cast<int>(msg.kind)},
                     {"corr", msg.correlation_id},
                     {"run", msg.run_id},
                     {"from", msg.from},
                     {"to", msg.to},
                     {"ref", msg.ref},
                     {"error", msg.error},
                     {"body", msg.body}};
    std::vector<std::uint64_t> sizes;
    for (const auto& p : msg.payloads) sizes.push_back(p ? p->size() : 0);
    h["payload_sizes"] = sizes;
    const std::string header = h.dump();

    {
        // All frames of one logical message stay contiguous per connection.
        std::lock_guard<std::mutex> wl(*conn_mutex);
        bool ok = write_frame(fd, header.data(), static_cast<std::uint32_t>(header.size()));
        for (const auto& p : msg.payloads) {
            if (!ok) break;
            static const std::uint8_t empty = 0;
            const void* data = p && !p->empty() ? static_cast<const void*>(p->data())
                                                : static_cast<const void*>(&empty);
            ok = ok && write_frame(fd, data, p ? static_cast<std::uint32_t>(p->size()) : 0);
        }
        if (!ok) throw ConnectionLostError("send to " + msg.to + " failed");
    }

    {
        std::lock_guard<std::mutex> m(metrics_mutex_);
        metrics_.on_send(from_site, to_site, envelope_bytes_);
        for (const auto& s : sizes) {
            metrics_.on_send(from_site, to_site, s);
        }
    }
    return msg.correlation_id;
}

void SocketTransport::send_after(double delay_s, Message msg) {
    if (delay_s > 0)
        std::this_thread::sleep_for(std::chrono::duration<double>(delay_s));
    send(std::move(msg));
}

bool SocketTransport::drive_until(const std::function<bool()>& done, double timeout_s) {
    auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_s);
    while (!done()) {
        if (std::chrono::steady_clock::now() >= deadline) return done();
        std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
    return true;
}

void SocketTransport::shutdown() {
    if (closed_.exchange(true)) return;
    std::vector<std::thread> joiners;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        for (auto& [key, fd] : connections_) ::close(fd);
        connections_.clear();
        for (auto& [id, ep] : endpoints_) {
            ep->open = false;
            ::shutdown(ep->listen_fd, SHUT_RDWR);
            ::close(ep->listen_fd);
        }
    }
    for (auto& [id, ep] : endpoints_) {
        if (ep->accept_thread.joinable()) ep->accept_thread.join();
        for (auto& r : ep->readers)
            if (r.joinable()) r.join();
    }
}

}  // namespace dflow
