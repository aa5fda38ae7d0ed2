#include "hematch/common/errors.hpp"

namespace hematch {

const char* error_kind_name(ErrorKind k) {
    switch (k) {
    case ErrorKind::param: return "param error";
    case ErrorKind::shape: return "shape error";
    case ErrorKind::alignment: return "alignment error";
    case ErrorKind::depth: return "depth error";
    case ErrorKind::key: return "key error";
    case ErrorKind::format: return "format error";
    case ErrorKind::conflict: return "conflict error";
    case ErrorKind::not_found: return "not found";
    case ErrorKind::bounds: return "bounds error";
    case ErrorKind::config: return "config error";
    case ErrorKind::protocol: return "protocol error";
    case ErrorKind::worker_fault: return "worker fault";
    case ErrorKind::aggregation: return "aggregation error";
    }
    return "unknown error";
}

} // namespace hematch
