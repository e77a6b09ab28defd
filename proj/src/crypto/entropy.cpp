#include "vpvn/crypto/entropy.hpp"

#include <openssl/evp.h>
#include <openssl/rand.h>

#include <algorithm>
#include <array>
#include <climits>

#include "vpvn/bytes.hpp"
#include "vpvn/error.hpp"

namespace vpvn::crypto {

std::uint64_t EntropySource::next_u64() {
  std::array<std::uint8_t, 8> b{};
  fill(b);
  std::uint64_t v = 0;
  for (std::uint8_t x : b) v = (v << 8) | x;
  return v;
}

SeededEntropy::SeededEntropy(std::uint64_t seed, std::string_view label) {
  Bytes p;
  put_string(p, label);
  put_u64(p, seed);
  prefix_.assign(p.begin(), p.end());
}

void SeededEntropy::fill(std::span<std::uint8_t> out) {
  std::size_t done = 0;
  while (done < out.size()) {
    Bytes input(prefix_.begin(), prefix_.end());
    put_u64(input, counter_++);
    std::array<std::uint8_t, 32> block{};
    unsigned int len = 0;
    if (EVP_Digest(input.data(), input.size(), block.data(), &len, EVP_sha256(), nullptr) != 1) {
      throw Error(Errc::kEntropyFailure, "SHA-256 unavailable");
    }
    std::size_t n = std::min(out.size() - done, block.size());
    std::copy_n(block.begin(), n, out.begin() + static_cast<std::ptrdiff_t>(done));
    done += n;
  }
}

void SystemEntropy::fill(std::span<std::uint8_t> out) {
  if (out.size() > static_cast<std::size_t>(INT_MAX) ||
      RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) {
    throw Error(Errc::kEntropyFailure, "RAND_bytes failed");
  }
}

}  // namespace vpvn::crypto
