#pragma once

#include <filesystem>

#include "vpvn/crypto/keys.hpp"

namespace vpvn::crypto {

// Private key file: "VPVS" || u32 32 || scalar || u32 65 || public point.
// Public key file:  "VPVP" || u32 65 || public point.
// Lengths are big-endian.
Bytes encode_private_key_file(const KeyPair& pair);
Bytes encode_public_key_file(const PublicPoint& point);

// Throw Error(kMalformed) for bad magic/lengths, Error(kInvalidPublicPoint)
// for an off-curve point, and Error(kMalformed) when the stored point does
// not match the scalar.
KeyPair decode_private_key_file(ByteView data);
PublicPoint decode_public_key_file(ByteView data);

// Throw std::runtime_error on I/O failure.
void write_file(const std::filesystem::path& path, ByteView data);
Bytes read_file(const std::filesystem::path& path);

}  // namespace vpvn::crypto
