#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

#include "vpvn/bytes.hpp"

namespace vpvn::crypto {

inline constexpr std::size_t kKeySize = 32;
inline constexpr std::size_t kNonceSize = 12;
inline constexpr std::size_t kTagSize = 16;

// Authenticated payload ciphers. AES-256-GCM is the default; the second
// suite exists so the inter-gateway cipher can be swapped.
enum class CipherSuite : std::uint8_t { kAes256Gcm, kChaCha20Poly1305 };

std::string_view to_string(CipherSuite suite);
// Throws Error(kMalformed) for unknown names.
CipherSuite parse_cipher_suite(std::string_view name);

enum class Direction : std::uint8_t { kInitiator = 0, kResponder = 1 };

Direction opposite(Direction d);

// direction byte || 3 zero bytes || 64-bit big-endian sequence.
struct Nonce {
  std::array<std::uint8_t, kNonceSize> bytes{};

  Direction direction() const { return static_cast<Direction>(bytes[0]); }
  std::uint64_t sequence() const;

  friend bool operator==(const Nonce&, const Nonce&) = default;
  friend auto operator<=>(const Nonce&, const Nonce&) = default;
};

Nonce derive_nonce(Direction direction, std::uint64_t sequence);

using KeyView = std::span<const std::uint8_t, kKeySize>;

// Returns ciphertext || 16-byte tag; ciphertext length equals plaintext
// length.
Bytes aead_seal(CipherSuite suite, KeyView key, const Nonce& nonce, ByteView associated,
                ByteView plaintext);

// Throws Error(kMalformed) when the input cannot hold a tag and
// Error(kIntegrityFailure) when authentication fails.
Bytes aead_open(CipherSuite suite, KeyView key, const Nonce& nonce, ByteView associated,
                ByteView sealed);

// Per-direction send high-water mark. A nonce may be claimed only if its
// sequence is above every sequence already claimed in that direction.
class NonceHighWater {
 public:
  // Throws Error(kNonceReuse).
  void claim(const Nonce& nonce);
  void reset() { next_ = {0, 0}; used_ = {false, false}; }

 private:
  std::array<std::uint64_t, 2> next_{0, 0};
  std::array<bool, 2> used_{false, false};
};

}  // namespace vpvn::crypto
