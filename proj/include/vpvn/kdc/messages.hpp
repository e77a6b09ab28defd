#pragma once

// KEYMGMT wire messages exchanged between subscribers and the KDC.
//
//   KeyRequest  0x01 | str requester | u64 session | u64 nonce
//               | ephemeral(65) | u16 n | ciphertext(n) | tag(16)
//   KeyGrant    0x02 | u64 session | u32 generation | str initiator
//               | str responder | wrapped(113) initiator | wrapped(113) responder
//   Rejection   0x03 | str requester | u64 session | u64 nonce | u8 cause
//
// str = u16 length || bytes; integers big-endian.

#include <cstdint>
#include <string>
#include <variant>

#include "vpvn/bytes.hpp"
#include "vpvn/crypto/keys.hpp"

namespace vpvn::kdc {

enum class RequestPurpose : std::uint8_t { kNewSession = 0, kRekey = 1 };

// Confidential part of a request, sealed to the KDC.
struct RequestBody {
  RequestPurpose purpose = RequestPurpose::kNewSession;
  std::string peer;

  friend bool operator==(const RequestBody&, const RequestBody&) = default;
};

struct Envelope {
  crypto::PublicPoint ephemeral{};
  Bytes ciphertext;
  std::array<std::uint8_t, crypto::kTagSize> tag{};

  friend bool operator==(const Envelope&, const Envelope&) = default;
};

struct KeyRequest {
  std::string requester;
  std::uint64_t session_id = 0;
  std::uint64_t nonce = 0;
  Envelope envelope;

  friend bool operator==(const KeyRequest&, const KeyRequest&) = default;
};

struct KeyGrant {
  std::uint64_t session_id = 0;
  std::uint32_t generation = 1;
  std::string initiator;
  std::string responder;
  crypto::WrappedKey for_initiator;
  crypto::WrappedKey for_responder;

  const crypto::WrappedKey& for_party(const std::string& id) const;

  friend bool operator==(const KeyGrant&, const KeyGrant&) = default;
};

enum class RejectCause : std::uint8_t {
  kNotAuthorized = 1,
  kUnknownSubscriber = 2,
  kReplay = 3,
  kSessionConflict = 4,
};

std::string_view to_string(RejectCause cause);

struct Rejection {
  std::string requester;
  std::uint64_t session_id = 0;
  std::uint64_t nonce = 0;
  RejectCause cause = RejectCause::kNotAuthorized;

  friend bool operator==(const Rejection&, const Rejection&) = default;
};

using KdcMessage = std::variant<KeyRequest, KeyGrant, Rejection>;

// Seals `body` to the KDC. The key-encryption key mixes an ephemeral and
// the requester's static ECDH share, so only the registered requester can
// produce an envelope the KDC accepts.
KeyRequest make_key_request(const std::string& requester, const crypto::KeyPair& requester_keys,
                            const crypto::PublicPoint& kdc_public, std::uint64_t session_id,
                            std::uint64_t nonce, const RequestBody& body,
                            crypto::EntropySource& entropy);

// Throws Error(kMalformedRequest) when the envelope fails to open.
RequestBody open_key_request(const KeyRequest& request, const crypto::KeyPair& kdc_keys,
                             const crypto::PublicPoint& requester_public);

Bytes encode_message(const KdcMessage& message);
// Throws Error(kMalformed).
KdcMessage decode_message(ByteView bytes);

}  // namespace vpvn::kdc
