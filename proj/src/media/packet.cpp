#include "vpvn/media/packet.hpp"

#include "vpvn/crypto/aead.hpp"
#include "vpvn/error.hpp"

namespace vpvn::media {

namespace {

constexpr std::uint8_t kPriorityMask = 0x07;
constexpr std::uint8_t kQosShift = 3;
constexpr std::uint8_t kQosMask = 0x18;
constexpr std::uint8_t kEncryptedBit = 0x20;
constexpr std::uint8_t kReservedFlagBits = 0xc0;

std::size_t expected_body(const PacketHeader& h) {
  return h.payload_length + (h.encrypted ? crypto::kTagSize : 0);
}

}  // namespace

std::string_view to_string(PacketType type) {
  switch (type) {
    case PacketType::kSignaling: return "SIGNALING";
    case PacketType::kAudio: return "AUDIO";
    case PacketType::kVideo: return "VIDEO";
    case PacketType::kKeyMgmt: return "KEYMGMT";
  }
  return "UNKNOWN";
}

PacketType parse_packet_type(std::string_view name) {
  for (auto t : {PacketType::kSignaling, PacketType::kAudio, PacketType::kVideo,
                 PacketType::kKeyMgmt}) {
    if (to_string(t) == name) return t;
  }
  throw Error(Errc::kMalformed, "unknown packet type " + std::string(name));
}

std::uint8_t PacketHeader::flags() const {
  return static_cast<std::uint8_t>((priority & kPriorityMask) |
                                   ((qos << kQosShift) & kQosMask) |
                                   (encrypted ? kEncryptedBit : 0));
}

HeaderBytes encode_header(const PacketHeader& h) {
  if (h.priority > 7) throw Error(Errc::kMalformed, "priority must be 0-7");
  if (h.qos > 3) throw Error(Errc::kMalformed, "QoS class must be 0-3");
  Bytes out;
  out.reserve(kHeaderSize);
  put_u8(out, h.version);
  put_u8(out, static_cast<std::uint8_t>(h.type));
  put_u8(out, h.flags());
  put_u8(out, 0);
  put_u64(out, h.session_id);
  put_u64(out, h.sequence);
  put_u32(out, h.payload_length);
  HeaderBytes bytes{};
  std::copy(out.begin(), out.end(), bytes.begin());
  return bytes;
}

PacketHeader decode_header(ByteView bytes) {
  if (bytes.size() < kHeaderSize) {
    throw Error(Errc::kTruncated, std::to_string(bytes.size()) + " bytes, header needs 24");
  }
  Reader r(bytes.first(kHeaderSize));
  PacketHeader h;
  h.version = r.u8();
  if (h.version != kVersion) throw Error(Errc::kBadVersion, std::to_string(h.version));
  std::uint8_t type = r.u8();
  std::uint8_t flags = r.u8();
  std::uint8_t reserved = r.u8();
  if (reserved != 0 || (flags & kReservedFlagBits) != 0) {
    throw Error(Errc::kNonzeroReserved, "reserved header bits set");
  }
  if (type > static_cast<std::uint8_t>(PacketType::kKeyMgmt)) {
    throw Error(Errc::kMalformed, "unknown packet type " + std::to_string(type));
  }
  h.type = static_cast<PacketType>(type);
  h.priority = flags & kPriorityMask;
  h.qos = static_cast<std::uint8_t>((flags & kQosMask) >> kQosShift);
  h.encrypted = (flags & kEncryptedBit) != 0;
  h.session_id = r.u64();
  h.sequence = r.u64();
  h.payload_length = r.u32();
  return h;
}

MediaPacket make_packet(PacketType type, Bytes payload, std::uint8_t priority, std::uint8_t qos,
                        std::uint64_t session_id, std::uint64_t sequence) {
  if (payload.size() > 0xffffffffu) throw Error(Errc::kMalformed, "payload too large");
  MediaPacket p;
  p.header.type = type;
  p.header.priority = priority;
  p.header.qos = qos;
  p.header.session_id = session_id;
  p.header.sequence = sequence;
  p.header.payload_length = static_cast<std::uint32_t>(payload.size());
  p.body = std::move(payload);
  return p;
}

Bytes encode_packet(const MediaPacket& packet) {
  if (packet.body.size() != expected_body(packet.header)) {
    throw Error(Errc::kLengthMismatch, "length field " +
                                           std::to_string(packet.header.payload_length) +
                                           ", body " + std::to_string(packet.body.size()));
  }
  HeaderBytes header = encode_header(packet.header);
  Bytes out(header.begin(), header.end());
  put_bytes(out, packet.body);
  return out;
}

MediaPacket decode_packet(ByteView bytes) {
  MediaPacket p;
  p.header = decode_header(bytes);
  ByteView body = bytes.subspan(kHeaderSize);
  if (body.size() != expected_body(p.header)) {
    throw Error(Errc::kLengthMismatch, "length field " + std::to_string(p.header.payload_length) +
                                           ", body " + std::to_string(body.size()));
  }
  p.body.assign(body.begin(), body.end());
  return p;
}

}  // namespace vpvn::media
