#include "vpvn/crypto/aead.hpp"

#include <openssl/evp.h>

#include <climits>
#include <memory>

#include "vpvn/error.hpp"

namespace vpvn::crypto {

namespace {

struct CtxDeleter {
  void operator()(EVP_CIPHER_CTX* ctx) const { EVP_CIPHER_CTX_free(ctx); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CtxDeleter>;

const EVP_CIPHER* cipher_for(CipherSuite suite) {
  switch (suite) {
    case CipherSuite::kAes256Gcm: return EVP_aes_256_gcm();
    case CipherSuite::kChaCha20Poly1305: return EVP_chacha20_poly1305();
  }
  throw Error(Errc::kMalformed, "unknown cipher suite");
}

int checked_len(std::size_t n) {
  if (n > static_cast<std::size_t>(INT_MAX)) throw Error(Errc::kMalformed, "input too large");
  return static_cast<int>(n);
}

[[noreturn]] void backend_failure(const char* what) {
  throw std::runtime_error(std::string("OpenSSL failure: ") + what);
}

CipherCtx init(CipherSuite suite, KeyView key, const Nonce& nonce, bool encrypt) {
  CipherCtx ctx(EVP_CIPHER_CTX_new());
  if (!ctx) backend_failure("EVP_CIPHER_CTX_new");
  const EVP_CIPHER* cipher = cipher_for(suite);
  int enc = encrypt ? 1 : 0;
  if (EVP_CipherInit_ex(ctx.get(), cipher, nullptr, nullptr, nullptr, enc) != 1 ||
      EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_AEAD_SET_IVLEN, kNonceSize, nullptr) != 1 ||
      EVP_CipherInit_ex(ctx.get(), nullptr, nullptr, key.data(), nonce.bytes.data(), enc) != 1) {
    backend_failure("cipher init");
  }
  return ctx;
}

}  // namespace

std::string_view to_string(CipherSuite suite) {
  switch (suite) {
    case CipherSuite::kAes256Gcm: return "aes-256-gcm";
    case CipherSuite::kChaCha20Poly1305: return "chacha20-poly1305";
  }
  return "unknown";
}

CipherSuite parse_cipher_suite(std::string_view name) {
  if (name == "aes-256-gcm") return CipherSuite::kAes256Gcm;
  if (name == "chacha20-poly1305") return CipherSuite::kChaCha20Poly1305;
  throw Error(Errc::kMalformed, "unknown cipher suite " + std::string(name));
}

Direction opposite(Direction d) {
  return d == Direction::kInitiator ? Direction::kResponder : Direction::kInitiator;
}

std::uint64_t Nonce::sequence() const {
  std::uint64_t v = 0;
  for (std::size_t i = 4; i < kNonceSize; ++i) v = (v << 8) | bytes[i];
  return v;
}

Nonce derive_nonce(Direction direction, std::uint64_t sequence) {
  Nonce n;
  n.bytes[0] = static_cast<std::uint8_t>(direction);
  for (std::size_t i = 0; i < 8; ++i) {
    n.bytes[kNonceSize - 1 - i] = static_cast<std::uint8_t>(sequence >> (8 * i));
  }
  return n;
}

Bytes aead_seal(CipherSuite suite, KeyView key, const Nonce& nonce, ByteView associated,
                ByteView plaintext) {
  CipherCtx ctx = init(suite, key, nonce, true);
  int len = 0;
  if (!associated.empty() &&
      EVP_EncryptUpdate(ctx.get(), nullptr, &len, associated.data(),
                        checked_len(associated.size())) != 1) {
    backend_failure("aad");
  }
  Bytes out(plaintext.size() + kTagSize);
  int written = 0;
  if (!plaintext.empty()) {
    if (EVP_EncryptUpdate(ctx.get(), out.data(), &len, plaintext.data(),
                          checked_len(plaintext.size())) != 1) {
      backend_failure("encrypt");
    }
    written = len;
  }
  if (EVP_EncryptFinal_ex(ctx.get(), out.data() + written, &len) != 1) backend_failure("final");
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_AEAD_GET_TAG, kTagSize,
                          out.data() + plaintext.size()) != 1) {
    backend_failure("tag");
  }
  return out;
}

Bytes aead_open(CipherSuite suite, KeyView key, const Nonce& nonce, ByteView associated,
                ByteView sealed) {
  if (sealed.size() < kTagSize) throw Error(Errc::kMalformed, "sealed payload shorter than tag");
  std::size_t body = sealed.size() - kTagSize;
  CipherCtx ctx = init(suite, key, nonce, false);
  int len = 0;
  if (!associated.empty() &&
      EVP_DecryptUpdate(ctx.get(), nullptr, &len, associated.data(),
                        checked_len(associated.size())) != 1) {
    backend_failure("aad");
  }
  Bytes out(body);
  int written = 0;
  if (body > 0) {
    if (EVP_DecryptUpdate(ctx.get(), out.data(), &len, sealed.data(), checked_len(body)) != 1) {
      backend_failure("decrypt");
    }
    written = len;
  }
  Bytes tag(sealed.begin() + static_cast<std::ptrdiff_t>(body), sealed.end());
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_AEAD_SET_TAG, kTagSize, tag.data()) != 1) {
    backend_failure("set tag");
  }
  if (EVP_DecryptFinal_ex(ctx.get(), out.data() + written, &len) != 1) {
    OPENSSL_cleanse(out.data(), out.size());
    throw Error(Errc::kIntegrityFailure, "authentication tag mismatch");
  }
  return out;
}

void NonceHighWater::claim(const Nonce& nonce) {
  auto d = static_cast<std::size_t>(nonce.direction());
  if (d > 1) throw Error(Errc::kMalformed, "nonce direction byte out of range");
  std::uint64_t seq = nonce.sequence();
  if (used_[d] && seq < next_[d]) {
    throw Error(Errc::kNonceReuse, "sequence " + std::to_string(seq) + " already used");
  }
  if (used_[d] && next_[d] == 0) {
    // The previous claim was 2^64-1; the sequence space is exhausted.
    throw Error(Errc::kNonceReuse, "sequence space exhausted");
  }
  next_[d] = seq + 1;
  used_[d] = true;
}

}  // namespace vpvn::crypto
