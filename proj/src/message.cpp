#include "dflow/message.hpp"

namespace dflow {

const char* to_string(MsgKind k) {
    switch (k) {
        case MsgKind::Dispatch: return "Dispatch";
        case MsgKind::DataRequest: return "DataRequest";
        case MsgKind::DataResponse: return "DataResponse";
        case MsgKind::Invoke: return "Invoke";
        case MsgKind::InvokeResult: return "InvokeResult";
        case MsgKind::Complete: return "Complete";
        case MsgKind::Cancel: return "Cancel";
    }
    return "?";
}

}  // namespace dflow
