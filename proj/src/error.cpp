#include "vpvn/error.hpp"

namespace vpvn {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::kDuplicateId: return "DUPLICATE_ID";
    case Errc::kDanglingArc: return "DANGLING_ARC";
    case Errc::kUnsafeInitial: return "UNSAFE_INITIAL";
    case Errc::kBadBranching: return "BAD_BRANCHING";
    case Errc::kNotEnabled: return "NOT_ENABLED";
    case Errc::kNondeterminism: return "NONDETERMINISM";
    case Errc::kStateExplosion: return "STATE_EXPLOSION";
    case Errc::kUnknownResolver: return "UNKNOWN_RESOLVER";
    case Errc::kUnknownEventKind: return "UNKNOWN_EVENT_KIND";
    case Errc::kEntropyFailure: return "ENTROPY_FAILURE";
    case Errc::kInvalidPublicPoint: return "INVALID_PUBLIC_POINT";
    case Errc::kIntegrityFailure: return "INTEGRITY_FAILURE";
    case Errc::kMalformed: return "MALFORMED";
    case Errc::kNonceReuse: return "NONCE_REUSE";
    case Errc::kDuplicateSubscriber: return "DUPLICATE_SUBSCRIBER";
    case Errc::kMalformedRequest: return "MALFORMED_REQUEST";
    case Errc::kUnknownSession: return "UNKNOWN_SESSION";
    case Errc::kNotAParty: return "NOT_A_PARTY";
    case Errc::kBadVersion: return "BAD_VERSION";
    case Errc::kTruncated: return "TRUNCATED";
    case Errc::kLengthMismatch: return "LENGTH_MISMATCH";
    case Errc::kNonzeroReserved: return "NONZERO_RESERVED";
    case Errc::kNoSessionKey: return "NO_SESSION_KEY";
    case Errc::kRekeyRequired: return "REKEY_REQUIRED";
    case Errc::kStaleGeneration: return "STALE_GENERATION";
    case Errc::kSchemaError: return "SCHEMA_ERROR";
    case Errc::kNoKdc: return "NO_KDC";
    case Errc::kDisconnected: return "DISCONNECTED";
    case Errc::kRejected: return "REJECTED";
    case Errc::kKdcUnreachable: return "KDC_UNREACHABLE";
    case Errc::kSessionClosed: return "SESSION_CLOSED";
    case Errc::kNoGatewaySession: return "NO_GATEWAY_SESSION";
  }
  return "UNKNOWN";
}

Error::Error(Errc code, const std::string& detail, Cause cause)
    : std::runtime_error(std::string(to_string(code)) +
                         (detail.empty() ? "" : ": " + detail)),
      code_(code),
      cause_(cause) {}

}  // namespace vpvn
