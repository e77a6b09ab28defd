#include "vpvn/crypto/keys.hpp"

#include <openssl/bn.h>
#include <openssl/core_names.h>
#include <openssl/ec.h>
#include <openssl/kdf.h>
#include <openssl/obj_mac.h>
#include <openssl/params.h>

#include <memory>

#include "vpvn/error.hpp"

namespace vpvn::crypto {

namespace {

struct BnDeleter {
  void operator()(BIGNUM* b) const { BN_clear_free(b); }
};
struct PointDeleter {
  void operator()(EC_POINT* p) const { EC_POINT_clear_free(p); }
};
struct CtxDeleter {
  void operator()(BN_CTX* c) const { BN_CTX_free(c); }
};
struct KdfDeleter {
  void operator()(EVP_KDF* k) const { EVP_KDF_free(k); }
};
struct KdfCtxDeleter {
  void operator()(EVP_KDF_CTX* k) const { EVP_KDF_CTX_free(k); }
};

using Bn = std::unique_ptr<BIGNUM, BnDeleter>;
using Point = std::unique_ptr<EC_POINT, PointDeleter>;
using BnCtx = std::unique_ptr<BN_CTX, CtxDeleter>;

[[noreturn]] void backend_failure(const char* what) {
  throw std::runtime_error(std::string("OpenSSL failure: ") + what);
}

const EC_GROUP* p256() {
  static const std::unique_ptr<EC_GROUP, decltype(&EC_GROUP_free)> group(
      EC_GROUP_new_by_curve_name(NID_X9_62_prime256v1), &EC_GROUP_free);
  if (!group) backend_failure("P-256 group");
  return group.get();
}

Bn scalar_to_bn(std::span<const std::uint8_t, kScalarSize> scalar) {
  Bn bn(BN_bin2bn(scalar.data(), static_cast<int>(scalar.size()), nullptr));
  if (!bn) backend_failure("BN_bin2bn");
  return bn;
}

bool scalar_in_range(const BIGNUM* d) {
  return !BN_is_zero(d) && BN_cmp(d, EC_GROUP_get0_order(p256())) < 0;
}

PublicPoint encode_point(const EC_POINT* point, BN_CTX* ctx) {
  PublicPoint out{};
  if (EC_POINT_point2oct(p256(), point, POINT_CONVERSION_UNCOMPRESSED, out.data(), out.size(),
                         ctx) != out.size()) {
    backend_failure("point2oct");
  }
  return out;
}

// nullptr unless the bytes are an uncompressed point on the curve.
Point decode_point(ByteView bytes, BN_CTX* ctx) {
  if (bytes.size() != kPointSize || bytes[0] != 0x04) return nullptr;
  Point p(EC_POINT_new(p256()));
  if (!p) backend_failure("EC_POINT_new");
  if (EC_POINT_oct2point(p256(), p.get(), bytes.data(), bytes.size(), ctx) != 1) return nullptr;
  if (EC_POINT_is_at_infinity(p256(), p.get()) ||
      EC_POINT_is_on_curve(p256(), p.get(), ctx) != 1) {
    return nullptr;
  }
  return p;
}

PublicPoint public_from_scalar(const BIGNUM* d, BN_CTX* ctx) {
  Point q(EC_POINT_new(p256()));
  if (!q || EC_POINT_mul(p256(), q.get(), d, nullptr, nullptr, ctx) != 1) {
    backend_failure("EC_POINT_mul");
  }
  return encode_point(q.get(), ctx);
}

Bytes wrap_associated_data(const std::string& recipient, std::uint64_t session,
                           std::uint32_t generation) {
  Bytes ad;
  constexpr std::string_view kLabel = "vpvn-wrap";
  ad.insert(ad.end(), kLabel.begin(), kLabel.end());
  put_string(ad, recipient);
  put_u64(ad, session);
  put_u32(ad, generation);
  return ad;
}

struct Kek {
  Secret<kKeySize> key;
  Nonce nonce;
};

Kek derive_kek(const Secret<32>& shared, const PublicPoint& ephemeral,
               const PublicPoint& recipient) {
  Bytes salt(ephemeral.begin(), ephemeral.end());
  salt.insert(salt.end(), recipient.begin(), recipient.end());
  constexpr std::string_view kInfo = "vpvn key wrap v1";
  Bytes okm = hkdf_sha256(shared.view(), salt,
                          ByteView(reinterpret_cast<const std::uint8_t*>(kInfo.data()),
                                   kInfo.size()),
                          kKeySize + kNonceSize);
  Kek kek;
  std::copy_n(okm.begin(), kKeySize, kek.key.mutable_view().begin());
  std::copy_n(okm.begin() + kKeySize, kNonceSize, kek.nonce.bytes.begin());
  OPENSSL_cleanse(okm.data(), okm.size());
  return kek;
}

}  // namespace

KeyPair gen_keypair(EntropySource& entropy) {
  BnCtx ctx(BN_CTX_new());
  if (!ctx) backend_failure("BN_CTX_new");
  // Rejection sampling keeps the scalar uniform in [1, n-1].
  for (int attempt = 0; attempt < 64; ++attempt) {
    Secret<kScalarSize> candidate;
    entropy.fill(candidate.mutable_view());
    Bn d = scalar_to_bn(candidate.view());
    if (!scalar_in_range(d.get())) continue;
    KeyPair kp;
    kp.private_scalar = candidate;
    kp.public_point = public_from_scalar(d.get(), ctx.get());
    return kp;
  }
  throw Error(Errc::kEntropyFailure, "entropy source never produced a valid scalar");
}

KeyPair keypair_from_scalar(std::span<const std::uint8_t, kScalarSize> scalar) {
  BnCtx ctx(BN_CTX_new());
  if (!ctx) backend_failure("BN_CTX_new");
  Bn d = scalar_to_bn(scalar);
  if (!scalar_in_range(d.get())) throw Error(Errc::kMalformed, "private scalar out of range");
  KeyPair kp;
  kp.private_scalar = Secret<kScalarSize>(scalar);
  kp.public_point = public_from_scalar(d.get(), ctx.get());
  return kp;
}

void validate_public_point(ByteView point) {
  BnCtx ctx(BN_CTX_new());
  if (!ctx) backend_failure("BN_CTX_new");
  if (!decode_point(point, ctx.get())) {
    throw Error(Errc::kInvalidPublicPoint, "not an uncompressed P-256 point");
  }
}

Secret<32> ecdh(const Secret<kScalarSize>& scalar, const PublicPoint& point) {
  BnCtx ctx(BN_CTX_new());
  if (!ctx) backend_failure("BN_CTX_new");
  Point peer = decode_point(point, ctx.get());
  if (!peer) throw Error(Errc::kInvalidPublicPoint, "peer point rejected");
  Bn d = scalar_to_bn(scalar.view());
  Point shared(EC_POINT_new(p256()));
  if (!shared || EC_POINT_mul(p256(), shared.get(), nullptr, peer.get(), d.get(), ctx.get()) != 1) {
    backend_failure("EC_POINT_mul");
  }
  if (EC_POINT_is_at_infinity(p256(), shared.get())) {
    throw Error(Errc::kInvalidPublicPoint, "shared point at infinity");
  }
  Bn x(BN_new());
  if (!x || EC_POINT_get_affine_coordinates(p256(), shared.get(), x.get(), nullptr, ctx.get()) != 1) {
    backend_failure("affine coordinates");
  }
  Secret<32> out;
  if (BN_bn2binpad(x.get(), out.mutable_view().data(), 32) != 32) backend_failure("bn2binpad");
  return out;
}

Bytes hkdf_sha256(ByteView ikm, ByteView salt, ByteView info, std::size_t length) {
  std::unique_ptr<EVP_KDF, KdfDeleter> kdf(EVP_KDF_fetch(nullptr, "HKDF", nullptr));
  if (!kdf) backend_failure("HKDF fetch");
  std::unique_ptr<EVP_KDF_CTX, KdfCtxDeleter> kctx(EVP_KDF_CTX_new(kdf.get()));
  if (!kctx) backend_failure("HKDF ctx");
  char digest[] = "SHA256";
  auto as_void = [](ByteView v) {
    return const_cast<void*>(static_cast<const void*>(v.data()));
  };
  OSSL_PARAM params[] = {
      OSSL_PARAM_construct_utf8_string(OSSL_KDF_PARAM_DIGEST, digest, 0),
      OSSL_PARAM_construct_octet_string(OSSL_KDF_PARAM_KEY, as_void(ikm), ikm.size()),
      OSSL_PARAM_construct_octet_string(OSSL_KDF_PARAM_SALT, as_void(salt), salt.size()),
      OSSL_PARAM_construct_octet_string(OSSL_KDF_PARAM_INFO, as_void(info), info.size()),
      OSSL_PARAM_construct_end(),
  };
  Bytes out(length);
  if (EVP_KDF_derive(kctx.get(), out.data(), out.size(), params) != 1) {
    backend_failure("HKDF derive");
  }
  return out;
}

SessionKey gen_session_key(EntropySource& entropy, std::uint64_t session_id,
                           std::uint32_t generation) {
  SessionKey key;
  entropy.fill(key.material.mutable_view());
  key.session_id = session_id;
  key.generation = generation;
  return key;
}

Bytes serialize_wrapped_key(const WrappedKey& w) {
  Bytes out;
  out.reserve(kWrappedKeySize);
  put_bytes(out, w.ephemeral);
  put_bytes(out, w.ciphertext);
  put_bytes(out, w.tag);
  return out;
}

WrappedKey parse_wrapped_key(ByteView blob, std::string recipient, std::uint64_t session_id,
                             std::uint32_t generation) {
  if (blob.size() != kWrappedKeySize) {
    throw Error(Errc::kMalformed, "wrapped key must be " + std::to_string(kWrappedKeySize) +
                                      " bytes, got " + std::to_string(blob.size()));
  }
  WrappedKey w;
  w.recipient = std::move(recipient);
  w.session_id = session_id;
  w.generation = generation;
  std::copy_n(blob.begin(), kPointSize, w.ephemeral.begin());
  std::copy_n(blob.begin() + kPointSize, kKeySize, w.ciphertext.begin());
  std::copy_n(blob.begin() + kPointSize + kKeySize, kTagSize, w.tag.begin());
  return w;
}

WrappedKey wrap_session_key(const SessionKey& key, const PublicPoint& recipient_public,
                            const std::string& recipient_id, EntropySource& entropy) {
  validate_public_point(recipient_public);
  KeyPair ephemeral = gen_keypair(entropy);
  Secret<32> shared = ecdh(ephemeral.private_scalar, recipient_public);
  Kek kek = derive_kek(shared, ephemeral.public_point, recipient_public);

  WrappedKey w;
  w.recipient = recipient_id;
  w.session_id = key.session_id;
  w.generation = key.generation;
  w.ephemeral = ephemeral.public_point;
  Bytes sealed = aead_seal(CipherSuite::kAes256Gcm, kek.key.view(), kek.nonce,
                           wrap_associated_data(recipient_id, key.session_id, key.generation),
                           key.material.view());
  std::copy_n(sealed.begin(), kKeySize, w.ciphertext.begin());
  std::copy_n(sealed.begin() + kKeySize, kTagSize, w.tag.begin());
  return w;
}

SessionKey unwrap_session_key(const WrappedKey& w, const KeyPair& recipient) {
  Secret<32> shared;
  try {
    shared = ecdh(recipient.private_scalar, w.ephemeral);
  } catch (const Error& e) {
    if (e.code() != Errc::kInvalidPublicPoint) throw;
    throw Error(Errc::kIntegrityFailure, "ephemeral point rejected");
  }
  Kek kek = derive_kek(shared, w.ephemeral, recipient.public_point);
  Bytes sealed(w.ciphertext.begin(), w.ciphertext.end());
  sealed.insert(sealed.end(), w.tag.begin(), w.tag.end());
  Bytes material = aead_open(CipherSuite::kAes256Gcm, kek.key.view(), kek.nonce,
                             wrap_associated_data(w.recipient, w.session_id, w.generation),
                             sealed);
  SessionKey key;
  std::copy_n(material.begin(), kKeySize, key.material.mutable_view().begin());
  OPENSSL_cleanse(material.data(), material.size());
  key.session_id = w.session_id;
  key.generation = w.generation;
  return key;
}

Bytes seal_payload(const SessionKey& key, NonceHighWater& guard, const Nonce& nonce,
                   ByteView associated, ByteView plaintext, CipherSuite suite) {
  guard.claim(nonce);
  return aead_seal(suite, key.material.view(), nonce, associated, plaintext);
}

Bytes open_payload(const SessionKey& key, const Nonce& nonce, ByteView associated,
                   ByteView sealed, CipherSuite suite) {
  return aead_open(suite, key.material.view(), nonce, associated, sealed);
}

}  // namespace vpvn::crypto
