#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vpvn {

// Error codes shared by every module. Names follow the wire/CLI contract.
enum class Errc {
  // enet
  kDuplicateId,
  kDanglingArc,
  kUnsafeInitial,
  kBadBranching,
  kNotEnabled,
  kNondeterminism,
  kStateExplosion,
  // model
  kUnknownResolver,
  kUnknownEventKind,
  // crypto
  kEntropyFailure,
  kInvalidPublicPoint,
  kIntegrityFailure,
  kMalformed,
  kNonceReuse,
  // kdc
  kDuplicateSubscriber,
  kMalformedRequest,
  kUnknownSession,
  kNotAParty,
  // media
  kBadVersion,
  kTruncated,
  kLengthMismatch,
  kNonzeroReserved,
  kNoSessionKey,
  kRekeyRequired,
  kStaleGeneration,
  // sim
  kSchemaError,
  kNoKdc,
  kDisconnected,
  kRejected,
  kKdcUnreachable,
  kSessionClosed,
  kNoGatewaySession,
};

std::string_view to_string(Errc code);

// Secondary detail for kIntegrityFailure and kRejected.
enum class Cause { kNone, kReplay };

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail, Cause cause = Cause::kNone);

  Errc code() const noexcept { return code_; }
  Cause cause() const noexcept { return cause_; }

 private:
  Errc code_;
  Cause cause_;
};

}  // namespace vpvn
