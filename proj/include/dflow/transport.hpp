#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>

#include "dflow/message.hpp"

namespace dflow {

// Per-link byte and message counters, frame granularity.
struct NetMetrics {
    struct Counter {
        std::uint64_t bytes = 0;
        std::uint64_t frames = 0;
    };
    std::map<std::pair<std::string, std::string>, Counter> per_site_link;
    std::uint64_t sent_bytes = 0;
    std::uint64_t received_bytes = 0;
    std::uint64_t inter_site_bytes = 0;

    void on_send(const std::string& from_site, const std::string& to_site, std::uint64_t bytes) {
        auto& c = per_site_link[{from_site, to_site}];
        c.bytes += bytes;
        c.frames += 1;
        sent_bytes += bytes;
        if (from_site != to_site) inter_site_bytes += bytes;
    }
    void on_receive(std::uint64_t bytes) { received_bytes += bytes; }
};

// Message layer with exact byte accounting. Implementations deliver each
// logical message exactly once, FIFO per (sender, receiver) pair, and invoke
// the receiver's handler serialized per endpoint.
class Transport {
  public:
    // now_s is the delivery time (virtual or wall-clock seconds).
    using Handler = std::function<void(const Message&, double now_s)>;

    virtual ~Transport() = default;

    virtual void register_endpoint(const std::string& id, const std::string& site,
                                   Handler handler) = 0;
    virtual void unregister_endpoint(const std::string& id) = 0;
    virtual bool has_endpoint(const std::string& id) const = 0;
    virtual std::string site_of(const std::string& id) const = 0;

    // Routes by msg.to. Assigns a fresh correlation id when msg.correlation_id
    // is zero and returns the id. Throws EndpointUnknownError for
    // unregistered destinations.
    virtual std::uint64_t send(Message msg) = 0;
    // Send after a sender-side processing delay.
    virtual void send_after(double delay_s, Message msg) = 0;

    virtual double now() const = 0;
    virtual std::uint64_t envelope_bytes() const = 0;
    virtual const NetMetrics& metrics() const = 0;

    // Drives delivery until done() holds or the transport is idle/timed out.
    // Returns true iff done() was observed.
    virtual bool drive_until(const std::function<bool()>& done, double timeout_s) = 0;
};

}  // namespace dflow
