#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "dflow/errors.hpp"

namespace dflow {

// Payload-size parameters shared by the simulator, the estimator, and the
// stub services. Output sizes are keyed per (service, operation);
// control_overhead_bytes models the fixed envelope (header frame) that every
// message carries on the wire.
class CostModel {
  public:
    static constexpr std::uint64_t kDefaultEnvelopeBytes = 512;

    std::uint64_t input_bytes = 0;
    std::uint64_t control_overhead_bytes = kDefaultEnvelopeBytes;

    void set_size(const std::string& service, const std::string& op, std::uint64_t bytes) {
        sizes_[{service, op}] = bytes;
    }
    void set_default_size(std::uint64_t bytes) { default_size_ = bytes; }

    std::uint64_t payload_bytes(const std::string& service, const std::string& op) const {
        auto it = sizes_.find({service, op});
        if (it != sizes_.end()) return it->second;
        if (default_size_) return *default_size_;
        throw MissingSizeError(service, op);
    }

    // Every operation produces `payload` bytes; the workflow input is `input` bytes.
    static CostModel uniform(std::uint64_t payload, std::uint64_t input,
                             std::uint64_t envelope = kDefaultEnvelopeBytes) {
        CostModel cm;
        cm.set_default_size(payload);
        cm.input_bytes = input;
        cm.control_overhead_bytes = envelope;
        return cm;
    }

  private:
    std::map<std::pair<std::string, std::string>, std::uint64_t> sizes_;
    std::optional<std::uint64_t> default_size_;
};

}  // namespace dflow
