#include "dflow/sim_transport.hpp"

#include "dflow/errors.hpp"

namespace dflow {

SimTransport::SimTransport(Topology topology, std::uint64_t envelope_bytes,
                           std::uint64_t event_budget)
    : topology_(std::move(topology)),
      envelope_bytes_(envelope_bytes),
      event_budget_(event_budget) {}

void SimTransport::register_endpoint(const std::string& id, const std::string& site,
                                     Handler handler) {
    endpoints_[id] = EndpointState{site, std::move(handler)};
}

void SimTransport::unregister_endpoint(const std::string& id) { endpoints_.erase(id); }

bool SimTransport::has_endpoint(const std::string& id) const { return endpoints_.count(id) > 0; }

std::string SimTransport::site_of(const std::string& id) const {
    auto it = endpoints_.find(id);
    if (it == endpoints_.end()) throw EndpointUnknownError(id);
    return it->second.site;
}

std::uint64_t SimTransport::send(Message msg) { return schedule(std::move(msg), now_); }

void SimTransport::send_after(double delay_s, Message msg) {
    schedule(std::move(msg), now_ + delay_s);
}

std::uint64_t SimTransport::schedule(Message msg, double send_time) {
    auto to_it = endpoints_.find(msg.to);
    if (to_it == endpoints_.end()) throw EndpointUnknownError(msg.to);
    auto from_it = endpoints_.find(msg.from);
    if (from_it == endpoints_.end()) throw EndpointUnknownError(msg.from);
    if (msg.correlation_id == 0) msg.correlation_id = next_correlation_++;

    const LinkModel link = topology_.link(from_it->second.site, to_it->second.site);
    auto& pair_last = pair_last_delivery_[{msg.from, msg.to}];

    // Header frame carrying the message, then one raw frame per payload.
    // Each frame takes latency + size/bandwidth; FIFO per endpoint pair.
    const int frame_count = 1 + static_cast<int>(msg.payloads.size());
    for (int i = 0; i < frame_count; ++i) {
        Frame f;
        f.to = msg.to;
        f.correlation_id = msg.correlation_id;
        f.frame_index = i;
        f.seq = next_seq_++;
        f.is_header = i == 0;
        f.bytes = i == 0 ? envelope_bytes_
                         : (msg.payloads[static_cast<size_t>(i - 1)]
                                ? msg.payloads[static_cast<size_t>(i - 1)]->size()
                                : 0);
        double arrival = send_time + link.latency_s +
                         static_cast<double>(f.bytes) / link.bandwidth_Bps;
        f.deliver_at = std::max(arrival, pair_last);
        pair_last = f.deliver_at;
        if (i == 0) f.message = msg;
        metrics_.on_send(from_it->second.site, to_it->second.site, f.bytes);
        queue_.push(std::move(f));
    }
    return msg.correlation_id;
}

void SimTransport::deliver(const Frame& f) {
    metrics_.on_receive(f.bytes);
    auto key = std::make_pair(f.to, f.correlation_id);
    Assembly& a = assembling_[key];
    if (f.is_header) {
        a.message = f.message;
        a.frames_expected = 1 + static_cast<int>(f.message.payloads.size());
    }
    a.frames_seen += 1;
    if (a.frames_expected == 0 || a.frames_seen < a.frames_expected) return;

    Message msg = std::move(a.message);
    assembling_.erase(key);
    auto ep = endpoints_.find(f.to);
    if (ep == endpoints_.end()) return;  // endpoint gone; drop
    ep->second.handler(msg, now_);
}

double SimTransport::run_until_idle() {
    std::uint64_t budget = event_budget_;
    while (!queue_.empty()) {
        if (budget-- == 0)
            throw LivelockError("simulated transport exceeded its event budget");
        Frame f = queue_.top();
        queue_.pop();
        now_ = f.deliver_at;
        deliver(f);
    }
    return now_;
}

bool SimTransport::drive_until(const std::function<bool()>& done, double /*timeout_s*/) {
    std::uint64_t budget = event_budget_;
    while (!done() && !queue_.empty()) {
        if (budget-- == 0)
            throw LivelockError("simulated transport exceeded its event budget");
        Frame f = queue_.top();
        queue_.pop();
        now_ = f.deliver_at;
        deliver(f);
    }
    return done();
}

}  // namespace dflow
