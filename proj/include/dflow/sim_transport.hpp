#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <queue>
#include <string>
#include <vector>

#include "dflow/topology.hpp"
#include "dflow/transport.hpp"

namespace dflow {

// Deterministic discrete-event network: virtual clock, per-frame delivery at
// send_time + latency + size/bandwidth, FIFO per endpoint pair. Single
// threaded; handlers run inline in event order. Event ordering is total:
// (time, receiver endpoint, correlation id, frame index, sequence).
class SimTransport final : public Transport {
  public:
    explicit SimTransport(Topology topology,
                          std::uint64_t envelope_bytes = 512,
                          std::uint64_t event_budget = 10'000'000);

    void register_endpoint(const std::string& id, const std::string& site,
                           Handler handler) override;
    void unregister_endpoint(const std::string& id) override;
    bool has_endpoint(const std::string& id) const override;
    std::string site_of(const std::string& id) const override;

    std::uint64_t send(Message msg) override;
    void send_after(double delay_s, Message msg) override;

    double now() const override { return now_; }
    std::uint64_t envelope_bytes() const override { return envelope_bytes_; }
    const NetMetrics& metrics() const override { return metrics_; }

    bool drive_until(const std::function<bool()>& done, double timeout_s) override;

    // Processes the event queue to quiescence; returns the final virtual time.
    // Throws LivelockError when the event budget is exhausted.
    double run_until_idle();

    const Topology& topology() const { return topology_; }

  private:
    struct Frame {
        double deliver_at = 0;
        std::string to;
        std::uint64_t correlation_id = 0;
        int frame_index = 0;  // 0 = header, i = payload i
        std::uint64_t seq = 0;
        std::uint64_t bytes = 0;
        Message message;  // carried on the header frame only
        bool is_header = false;

        bool operator>(const Frame& o) const {
            auto key = [](const Frame& f) {
                return std::tie(f.deliver_at, f.to, f.correlation_id, f.frame_index, f.seq);
            };
            return key(*this) > key(o);
        }
    };

    struct EndpointState {
        std::string site;
        Handler handler;
    };

    struct Assembly {
        Message message;
        int frames_seen = 0;
        int frames_expected = 0;
    };

    std::uint64_t schedule(Message msg, double send_time);
    void deliver(const Frame& f);

    Topology topology_;
    std::uint64_t envelope_bytes_;
    std::uint64_t event_budget_;
    double now_ = 0;
    std::uint64_t next_correlation_ = 1;
    std::uint64_t next_seq_ = 1;
    std::map<std::string, EndpointState> endpoints_;
    std::map<std::pair<std::string, std::string>, double> pair_last_delivery_;
    std::priority_queue<Frame, std::vector<Frame>, std::greater<>> queue_;
    std::map<std::pair<std::string, std::uint64_t>, Assembly> assembling_;
    NetMetrics metrics_;
};

}  // namespace dflow
