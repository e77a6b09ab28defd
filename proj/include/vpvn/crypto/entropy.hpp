#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace vpvn::crypto {

class EntropySource {
 public:
  virtual ~EntropySource() = default;
  // Throws Error(kEntropyFailure) if no bytes can be produced.
  virtual void fill(std::span<std::uint8_t> out) = 0;

  std::uint64_t next_u64();
};

// Deterministic stream: SHA-256(label || seed || counter) blocks. Two
// sources with the same seed and label produce identical bytes.
class SeededEntropy final : public EntropySource {
 public:
  explicit SeededEntropy(std::uint64_t seed, std::string_view label = {});
  void fill(std::span<std::uint8_t> out) override;

 private:
  std::string prefix_;
  std::uint64_t counter_ = 0;
};

// Operating-system randomness through OpenSSL's RAND_bytes.
class SystemEntropy final : public EntropySource {
 public:
  void fill(std::span<std::uint8_t> out) override;
};

}  // namespace vpvn::crypto
