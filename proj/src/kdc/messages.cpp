#include "vpvn/kdc/messages.hpp"

#include "vpvn/error.hpp"

namespace vpvn::kdc {

namespace {

constexpr std::uint8_t kRequestType = 0x01;
constexpr std::uint8_t kGrantType = 0x02;
constexpr std::uint8_t kRejectionType = 0x03;

Bytes request_associated_data(const KeyRequest& r) {
  Bytes ad;
  constexpr std::string_view kLabel = "vpvn-req";
  ad.insert(ad.end(), kLabel.begin(), kLabel.end());
  put_string(ad, r.requester);
  put_u64(ad, r.session_id);
  put_u64(ad, r.nonce);
  return ad;
}

struct EnvelopeKey {
  crypto::Secret<crypto::kKeySize> key;
  crypto::Nonce nonce;
};

EnvelopeKey derive_envelope_key(const crypto::Secret<32>& ephemeral_share,
                                const crypto::Secret<32>& static_share,
                                const crypto::PublicPoint& ephemeral,
                                const crypto::PublicPoint& kdc_public) {
  Bytes ikm;
  put_bytes(ikm, ephemeral_share.view());
  put_bytes(ikm, static_share.view());
  Bytes salt(ephemeral.begin(), ephemeral.end());
  salt.insert(salt.end(), kdc_public.begin(), kdc_public.end());
  constexpr std::string_view kInfo = "vpvn key request v1";
  Bytes okm = crypto::hkdf_sha256(
      ikm, salt, ByteView(reinterpret_cast<const std::uint8_t*>(kInfo.data()), kInfo.size()),
      crypto::kKeySize + crypto::kNonceSize);
  OPENSSL_cleanse(ikm.data(), ikm.size());
  EnvelopeKey out;
  std::copy_n(okm.begin(), crypto::kKeySize, out.key.mutable_view().begin());
  std::copy_n(okm.begin() + crypto::kKeySize, crypto::kNonceSize, out.nonce.bytes.begin());
  OPENSSL_cleanse(okm.data(), okm.size());
  return out;
}

crypto::WrappedKey read_wrapped(Reader& r, const std::string& recipient, std::uint64_t session,
                                std::uint32_t generation) {
  return crypto::parse_wrapped_key(r.take(crypto::kWrappedKeySize), recipient, session,
                                   generation);
}

}  // namespace

const crypto::WrappedKey& KeyGrant::for_party(const std::string& id) const {
  if (id == initiator) return for_initiator;
  if (id == responder) return for_responder;
  throw Error(Errc::kNotAParty, id + " is not a party to session");
}

std::string_view to_string(RejectCause cause) {
  switch (cause) {
    case RejectCause::kNotAuthorized: return "NOT_AUTHORIZED";
    case RejectCause::kUnknownSubscriber: return "UNKNOWN_SUBSCRIBER";
    case RejectCause::kReplay: return "REPLAY";
    case RejectCause::kSessionConflict: return "SESSION_CONFLICT";
  }
  return "UNKNOWN";
}

KeyRequest make_key_request(const std::string& requester, const crypto::KeyPair& requester_keys,
                            const crypto::PublicPoint& kdc_public, std::uint64_t session_id,
                            std::uint64_t nonce, const RequestBody& body,
                            crypto::EntropySource& entropy) {
  KeyRequest request;
  request.requester = requester;
  request.session_id = session_id;
  request.nonce = nonce;

  crypto::KeyPair ephemeral = crypto::gen_keypair(entropy);
  EnvelopeKey ek = derive_envelope_key(crypto::ecdh(ephemeral.private_scalar, kdc_public),
                                       crypto::ecdh(requester_keys.private_scalar, kdc_public),
                                       ephemeral.public_point, kdc_public);
  Bytes plaintext;
  put_u8(plaintext, static_cast<std::uint8_t>(body.purpose));
  put_string(plaintext, body.peer);
  Bytes sealed = crypto::aead_seal(crypto::CipherSuite::kAes256Gcm, ek.key.view(), ek.nonce,
                                   request_associated_data(request), plaintext);
  request.envelope.ephemeral = ephemeral.public_point;
  request.envelope.ciphertext.assign(sealed.begin(), sealed.end() - crypto::kTagSize);
  std::copy(sealed.end() - crypto::kTagSize, sealed.end(), request.envelope.tag.begin());
  return request;
}

RequestBody open_key_request(const KeyRequest& request, const crypto::KeyPair& kdc_keys,
                             const crypto::PublicPoint& requester_public) {
  try {
    EnvelopeKey ek = derive_envelope_key(
        crypto::ecdh(kdc_keys.private_scalar, request.envelope.ephemeral),
        crypto::ecdh(kdc_keys.private_scalar, requester_public), request.envelope.ephemeral,
        kdc_keys.public_point);
    Bytes sealed = request.envelope.ciphertext;
    sealed.insert(sealed.end(), request.envelope.tag.begin(), request.envelope.tag.end());
    Bytes plaintext = crypto::aead_open(crypto::CipherSuite::kAes256Gcm, ek.key.view(), ek.nonce,
                                        request_associated_data(request), sealed);
    Reader r(plaintext);
    RequestBody body;
    std::uint8_t purpose = r.u8();
    if (purpose > 1) throw Error(Errc::kMalformed, "unknown request purpose");
    body.purpose = static_cast<RequestPurpose>(purpose);
    body.peer = r.string();
    if (!r.done()) throw Error(Errc::kMalformed, "trailing request bytes");
    return body;
  } catch (const Error& e) {
    throw Error(Errc::kMalformedRequest, e.what());
  }
}

Bytes encode_message(const KdcMessage& message) {
  Bytes out;
  std::visit(
      [&out](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, KeyRequest>) {
          put_u8(out, kRequestType);
          put_string(out, m.requester);
          put_u64(out, m.session_id);
          put_u64(out, m.nonce);
          put_bytes(out, m.envelope.ephemeral);
          if (m.envelope.ciphertext.size() > 0xffff) {
            throw Error(Errc::kMalformed, "request envelope too large");
          }
          put_u16(out, static_cast<std::uint16_t>(m.envelope.ciphertext.size()));
          put_bytes(out, m.envelope.ciphertext);
          put_bytes(out, m.envelope.tag);
        } else if constexpr (std::is_same_v<T, KeyGrant>) {
          put_u8(out, kGrantType);
          put_u64(out, m.session_id);
          put_u32(out, m.generation);
          put_string(out, m.initiator);
          put_string(out, m.responder);
          put_bytes(out, crypto::serialize_wrapped_key(m.for_initiator));
          put_bytes(out, crypto::serialize_wrapped_key(m.for_responder));
        } else {
          put_u8(out, kRejectionType);
          put_string(out, m.requester);
          put_u64(out, m.session_id);
          put_u64(out, m.nonce);
          put_u8(out, static_cast<std::uint8_t>(m.cause));
        }
      },
      message);
  return out;
}

KdcMessage decode_message(ByteView bytes) {
  Reader r(bytes);
  std::uint8_t type = r.u8();
  KdcMessage result;
  switch (type) {
    case kRequestType: {
      KeyRequest m;
      m.requester = r.string();
      m.session_id = r.u64();
      m.nonce = r.u64();
      ByteView eph = r.take(crypto::kPointSize);
      std::copy(eph.begin(), eph.end(), m.envelope.ephemeral.begin());
      ByteView ct = r.take(r.u16());
      m.envelope.ciphertext.assign(ct.begin(), ct.end());
      ByteView tag = r.take(crypto::kTagSize);
      std::copy(tag.begin(), tag.end(), m.envelope.tag.begin());
      result = std::move(m);
      break;
    }
    case kGrantType: {
      KeyGrant m;
      m.session_id = r.u64();
      m.generation = r.u32();
      m.initiator = r.string();
      m.responder = r.string();
      m.for_initiator = read_wrapped(r, m.initiator, m.session_id, m.generation);
      m.for_responder = read_wrapped(r, m.responder, m.session_id, m.generation);
      result = std::move(m);
      break;
    }
    case kRejectionType: {
      Rejection m;
      m.requester = r.string();
      m.session_id = r.u64();
      m.nonce = r.u64();
      std::uint8_t cause = r.u8();
      if (cause < 1 || cause > 4) throw Error(Errc::kMalformed, "unknown rejection cause");
      m.cause = static_cast<RejectCause>(cause);
      result = std::move(m);
      break;
    }
    default:
      throw Error(Errc::kMalformed, "unknown KEYMGMT message type " + std::to_string(type));
  }
  if (!r.done()) throw Error(Errc::kMalformed, "trailing KEYMGMT bytes");
  return result;
}

}  // namespace vpvn::kdc
