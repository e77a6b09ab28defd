#pragma once

// Subscriber key pairs on NIST P-256, 256-bit session keys, ECIES-style
// session-key wrapping and payload sealing.

#include <array>
#include <cstdint>
#include <string>

#include "vpvn/bytes.hpp"
#include "vpvn/crypto/aead.hpp"
#include "vpvn/crypto/entropy.hpp"
#include "vpvn/crypto/secret.hpp"

namespace vpvn::crypto {

inline constexpr std::size_t kScalarSize = 32;
// Uncompressed SEC1 encoding: 0x04 || X || Y.
inline constexpr std::size_t kPointSize = 65;
inline constexpr std::size_t kWrappedKeySize = kPointSize + kKeySize + kTagSize;

using PublicPoint = std::array<std::uint8_t, kPointSize>;

struct KeyPair {
  Secret<kScalarSize> private_scalar;
  PublicPoint public_point{};
};

KeyPair gen_keypair(EntropySource& entropy);

// Recomputes the public point; throws Error(kMalformed) if the scalar is
// zero or not below the group order.
KeyPair keypair_from_scalar(std::span<const std::uint8_t, kScalarSize> scalar);

// Structural check through the curve library. Throws
// Error(kInvalidPublicPoint).
void validate_public_point(ByteView point);

struct SessionKey {
  Secret<kKeySize> material;
  std::uint64_t session_id = 0;
  std::uint32_t generation = 1;

  friend bool operator==(const SessionKey&, const SessionKey&) = default;
};

SessionKey gen_session_key(EntropySource& entropy, std::uint64_t session_id,
                           std::uint32_t generation = 1);

struct WrappedKey {
  // Metadata bound as associated data; carried by the enclosing message.
  std::string recipient;
  std::uint64_t session_id = 0;
  std::uint32_t generation = 1;

  PublicPoint ephemeral{};
  std::array<std::uint8_t, kKeySize> ciphertext{};
  std::array<std::uint8_t, kTagSize> tag{};

  friend bool operator==(const WrappedKey&, const WrappedKey&) = default;
};

// ephemeral (65) || ciphertext (32) || tag (16) = 113 bytes.
Bytes serialize_wrapped_key(const WrappedKey& wrapped);
// Throws Error(kMalformed) unless the blob is exactly 113 bytes.
WrappedKey parse_wrapped_key(ByteView blob, std::string recipient, std::uint64_t session_id,
                             std::uint32_t generation);

// Fresh ephemeral key, ECDH with the recipient, HKDF-SHA256 into an
// AES-256-GCM key-encryption key. Throws Error(kInvalidPublicPoint).
WrappedKey wrap_session_key(const SessionKey& key, const PublicPoint& recipient_public,
                            const std::string& recipient_id, EntropySource& entropy);

// Throws Error(kIntegrityFailure) for the wrong recipient key or any
// tampering; the two cases are indistinguishable.
SessionKey unwrap_session_key(const WrappedKey& wrapped, const KeyPair& recipient);

// Raw ECDH: x-coordinate of scalar * point. Throws Error(kInvalidPublicPoint).
Secret<32> ecdh(const Secret<kScalarSize>& scalar, const PublicPoint& point);

// HKDF-SHA256.
Bytes hkdf_sha256(ByteView ikm, ByteView salt, ByteView info, std::size_t length);

// AEAD over a media payload. `guard` enforces nonce uniqueness per key
// generation and throws Error(kNonceReuse).
Bytes seal_payload(const SessionKey& key, NonceHighWater& guard, const Nonce& nonce,
                   ByteView associated, ByteView plaintext,
                   CipherSuite suite = CipherSuite::kAes256Gcm);

Bytes open_payload(const SessionKey& key, const Nonce& nonce, ByteView associated,
                   ByteView sealed, CipherSuite suite = CipherSuite::kAes256Gcm);

}  // namespace vpvn::crypto
