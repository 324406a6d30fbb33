#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "dflow/transport.hpp"

namespace dflow {

// TCP message layer speaking the length-prefixed frame protocol: a 4-byte
// big-endian length then a JSON header object, followed by one raw frame per
// payload (4-byte length + bytes). One connection per endpoint pair,
// no reconnect (fail-fast). Byte accounting uses the same envelope model as
// the simulated transport so both report identical totals for the same run.
class SocketTransport final : public Transport {
  public:
    explicit SocketTransport(std::uint64_t envelope_bytes = 512,
                             const std::string& host = "127.0.0.1");
    ~SocketTransport() override;

    SocketTransport(const SocketTransport&) = delete;
    SocketTransport& operator=(const SocketTransport&) = delete;

    void register_endpoint(const std::string& id, const std::string& site,
                           Handler handler) override;
    void unregister_endpoint(const std::string& id) override;
    bool has_endpoint(const std::string& id) const override;
    std::string site_of(const std::string& id) const override;

    std::uint64_t send(Message msg) override;
    void send_after(double delay_s, Message msg) override;

    double now() const override;
    std::uint64_t envelope_bytes() const override { return envelope_bytes_; }
    const NetMetrics& metrics() const override { return metrics_; }

    bool drive_until(const std::function<bool()>& done, double timeout_s) override;

    // host:port listener address of an endpoint.
    std::string address_of(const std::string& id) const;

    void shutdown();

  private:
    struct Endpoint {
        std::string site;
        Handler handler;
        int listen_fd = -1;
        int port = 0;
        std::thread accept_thread;
        std::vector<std::thread> readers;
        std::mutex handler_mutex;  // serialize deliveries per endpoint
        std::atomic<bool> open{true};
    };

    void accept_loop(Endpoint* ep);
    void reader_loop(Endpoint* ep, int fd);
    int connect_to(const std::string& endpoint_id);

    std::uint64_t envelope_bytes_;
    std::string host_;
    std::chrono::steady_clock::time_point epoch_;

    mutable std::mutex mutex_;
    std::map<std::string, std::unique_ptr<Endpoint>> endpoints_;
    std::map<std::pair<std::string, std::string>, int> connections_;
    std::map<std::pair<std::string, std::string>, std::unique_ptr<std::mutex>> conn_mutexes_;
    std::atomic<std::uint64_t> next_correlation_{1};
    NetMetrics metrics_;
    std::mutex metrics_mutex_;
    std::atomic<bool> closed_{false};
};

}  // namespace dflow
