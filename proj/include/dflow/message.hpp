#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

namespace dflow {

enum class MsgKind {
    Dispatch,      // orchestrator -> proxy: fragment + peer table
    DataRequest,   // pull a data ref from its owner
    DataResponse,  // answers DataRequest; carries one payload (or an error)
    Invoke,        // proxy/engine -> stub: operation call; one payload per arg
    InvokeResult,  // stub -> caller: result payload (or an error)
    Complete,      // proxy -> orchestrator: all fragment nodes fired
    Cancel,        // abort notice (failure propagation)
};

const char* to_string(MsgKind k);

using Payload = std::shared_ptr<const std::vector<std::uint8_t>>;

inline Payload make_payload(std::vector<std::uint8_t> bytes) {
    return std::make_shared<const std::vector<std::uint8_t>>(std::move(bytes));
}

// One logical message. On the wire it becomes a fixed-size header frame
// (modeled at the cost model's control_overhead_bytes) followed by one raw
// frame per payload.
struct Message {
    MsgKind kind = MsgKind::Cancel;
    std::uint64_t correlation_id = 0;  // 0 = assign at send; responses echo the request id
    std::string run_id;
    std::string from;
    std::string to;
    std::string ref;       // data ref / fragment id / cancel reason
    nlohmann::json body;   // kind-specific control fields
    std::vector<Payload> payloads;
    bool error = false;

    std::uint64_t payload_size() const {
        std::uint64_t n = 0;
        for (const auto& p : payloads) n += p ? p->size() : 0;
        return n;
    }
    std::uint64_t wire_size(std::uint64_t envelope_bytes) const {
        return envelope_bytes + payload_size();
    }
};

}  // namespace dflow
