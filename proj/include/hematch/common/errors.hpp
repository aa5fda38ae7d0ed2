#pragma once

#include <stdexcept>
#include <string>

namespace hematch {

// Every failure mode maps to one kind; the wire protocol and the CLI report
// the kind name, so the set below is part of the external contract.
enum class ErrorKind {
    param,        // invalid or mismatched parameter set
    shape,        // wrong vector length / non-finite input
    alignment,    // level or scale mismatch between operands
    depth,        // no levels left for a multiply
    key,          // missing key, wrong key, digest mismatch on key material
    format,       // malformed serialized container
    conflict,     // slot already occupied
    not_found,    // unknown user / missing record
    bounds,       // index outside the addressable range
    config,       // bad service configuration
    protocol,     // malformed or unexpected network message
    worker_fault, // worker unreachable, timed out, or returned an error
    aggregation,  // partial results do not cover the expected shards
};

const char* error_kind_name(ErrorKind k);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(std::string(error_kind_name(kind)) + ": " + msg), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

#define HEMATCH_DEFINE_ERROR(Name, kind_value)                                        \
    struct Name : Error {                                                             \
        explicit Name(const std::string& msg) : Error(ErrorKind::kind_value, msg) {}  \
    }

HEMATCH_DEFINE_ERROR(ParamError, param);
HEMATCH_DEFINE_ERROR(ShapeError, shape);
HEMATCH_DEFINE_ERROR(AlignmentError, alignment);
HEMATCH_DEFINE_ERROR(DepthError, depth);
HEMATCH_DEFINE_ERROR(KeyError, key);
HEMATCH_DEFINE_ERROR(FormatError, format);
HEMATCH_DEFINE_ERROR(ConflictError, conflict);
HEMATCH_DEFINE_ERROR(NotFoundError, not_found);
HEMATCH_DEFINE_ERROR(BoundsError, bounds);
HEMATCH_DEFINE_ERROR(ConfigError, config);
HEMATCH_DEFINE_ERROR(ProtocolError, protocol);
HEMATCH_DEFINE_ERROR(WorkerFault, worker_fault);
HEMATCH_DEFINE_ERROR(AggregationError, aggregation);

#undef HEMATCH_DEFINE_ERROR

} // namespace hematch
