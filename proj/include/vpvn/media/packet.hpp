#pragma once

// 24-byte media frame header, all multi-byte fields big-endian:
//
//   0  version (0x01)
//   1  packet type: 0 SIGNALING, 1 AUDIO, 2 VIDEO, 3 KEYMGMT
//   2  flags: bits 0-2 priority, bits 3-4 QoS class, bit 5 encrypted,
//      bits 6-7 zero
//   3  reserved (0)
//   4  session id (8)
//   12 sequence (8)
//   20 payload length (4), excluding the 16-byte tag of encrypted frames

#include <array>
#include <cstdint>
#include <string_view>

#include "vpvn/bytes.hpp"

namespace vpvn::media {

inline constexpr std::size_t kHeaderSize = 24;
inline constexpr std::uint8_t kVersion = 0x01;

enum class PacketType : std::uint8_t { kSignaling = 0, kAudio = 1, kVideo = 2, kKeyMgmt = 3 };

std::string_view to_string(PacketType type);
// Accepts SIGNALING, AUDIO, VIDEO, KEYMGMT; throws Error(kMalformed).
PacketType parse_packet_type(std::string_view name);

constexpr bool is_media(PacketType t) {
  return t == PacketType::kAudio || t == PacketType::kVideo;
}

struct PacketHeader {
  std::uint8_t version = kVersion;
  PacketType type = PacketType::kSignaling;
  std::uint8_t priority = 0;  // 0-7
  std::uint8_t qos = 0;       // 0-3
  bool encrypted = false;
  std::uint64_t session_id = 0;
  std::uint64_t sequence = 0;
  std::uint32_t payload_length = 0;

  std::uint8_t flags() const;

  friend bool operator==(const PacketHeader&, const PacketHeader&) = default;
};

using HeaderBytes = std::array<std::uint8_t, kHeaderSize>;

// Throws Error(kMalformed) for out-of-range priority or QoS.
HeaderBytes encode_header(const PacketHeader& header);
// Validates version, reserved byte/flag bits and packet type.
PacketHeader decode_header(ByteView bytes);

struct MediaPacket {
  PacketHeader header;
  // Plaintext payload, or ciphertext || tag when header.encrypted.
  Bytes body;

  friend bool operator==(const MediaPacket&, const MediaPacket&) = default;
};

MediaPacket make_packet(PacketType type, Bytes payload, std::uint8_t priority = 0,
                        std::uint8_t qos = 0, std::uint64_t session_id = 0,
                        std::uint64_t sequence = 0);

// Throws Error(kLengthMismatch) if the length field disagrees with the body.
Bytes encode_packet(const MediaPacket& packet);

// Errors: kTruncated, kBadVersion, kNonzeroReserved, kLengthMismatch,
// kMalformed (unknown type).
MediaPacket decode_packet(ByteView bytes);

}  // namespace vpvn::media
