#include "vpvn/media/layer.hpp"

#include "vpvn/error.hpp"

namespace vpvn::media {

SessionState::SessionState(std::uint64_t session_id, crypto::Direction direction,
                           RekeyPolicy policy, std::size_t replay_window,
                           crypto::CipherSuite suite)
    : session_id_(session_id),
      direction_(direction),
      policy_(policy),
      replay_window_(replay_window),
      suite_(suite) {
  if (replay_window_ > kMaxReplayWindow) {
    throw Error(Errc::kMalformed, "replay window above 64");
  }
}

bool SessionState::replayed(std::uint64_t sequence) const {
  if (!highest_received_) return false;
  std::uint64_t highest = *highest_received_;
  if (sequence > highest) return false;
  std::uint64_t age = highest - sequence;
  if (age == 0 || age >= replay_window_) return true;
  return ((received_bitmap_ >> age) & 1) != 0;
}

void SessionState::mark_received(std::uint64_t sequence) {
  if (!highest_received_) {
    highest_received_ = sequence;
    received_bitmap_ = 1;
    return;
  }
  std::uint64_t highest = *highest_received_;
  if (sequence > highest) {
    std::uint64_t shift = sequence - highest;
    received_bitmap_ = shift >= 64 ? 0 : received_bitmap_ << shift;
    received_bitmap_ |= 1;
    highest_received_ = sequence;
  } else {
    received_bitmap_ |= std::uint64_t{1} << (highest - sequence);
  }
}

bool rekey_due(const SessionState& s) {
  return s.rekey_requested_ || s.packets_since_rekey_ >= s.policy_.max_packets ||
         s.bytes_since_rekey_ >= s.policy_.max_bytes;
}

void install_key(SessionState& s, const crypto::SessionKey& key) {
  if (key.session_id != s.session_id_) {
    throw Error(Errc::kMalformed, "key belongs to session " + model::format_session_id(key.session_id));
  }
  if (s.key_ && key.generation <= s.key_->generation) {
    throw Error(Errc::kStaleGeneration, "generation " + std::to_string(key.generation) +
                                            " does not follow " +
                                            std::to_string(s.key_->generation));
  }
  s.key_ = key;
  s.guard_.reset();
  s.next_send_ = 0;
  s.packets_since_rekey_ = 0;
  s.bytes_since_rekey_ = 0;
  s.rekey_requested_ = false;
  s.highest_received_.reset();
  s.received_bitmap_ = 0;
}

MediaPacket protect(const MediaPacket& packet, SessionState& s) {
  if (!is_media(packet.header.type)) return packet;
  if (!s.key_) throw Error(Errc::kNoSessionKey, "protect before key installation");
  if (rekey_due(s)) throw Error(Errc::kRekeyRequired, "key budget exhausted");
  if (packet.header.encrypted) throw Error(Errc::kMalformed, "frame is already protected");
  if (packet.body.size() != packet.header.payload_length) {
    throw Error(Errc::kLengthMismatch, "payload length field disagrees with payload");
  }

  MediaPacket out;
  out.header = packet.header;
  out.header.session_id = s.session_id_;
  out.header.sequence = s.next_send_;
  out.header.encrypted = true;
  HeaderBytes associated = encode_header(out.header);
  crypto::Nonce nonce = crypto::derive_nonce(s.direction_, out.header.sequence);
  out.body = crypto::seal_payload(*s.key_, s.guard_, nonce, associated, packet.body, s.suite_);

  ++s.next_send_;
  ++s.packets_since_rekey_;
  s.bytes_since_rekey_ += packet.body.size();
  s.notify(model::EventKind::kFrameEncrypted);
  return out;
}

MediaPacket unprotect(const MediaPacket& packet, SessionState& s) {
  if (!is_media(packet.header.type)) {
    if (packet.header.encrypted) {
      throw Error(Errc::kIntegrityFailure, "protected payload on a non-media packet");
    }
    return packet;
  }
  if (!s.key_) throw Error(Errc::kNoSessionKey, "unprotect before key installation");
  if (!packet.header.encrypted) {
    throw Error(Errc::kIntegrityFailure, "media frame arrived without protection");
  }
  if (packet.body.size() != packet.header.payload_length + crypto::kTagSize) {
    throw Error(Errc::kLengthMismatch, "payload length field disagrees with payload");
  }
  if (s.replayed(packet.header.sequence)) {
    throw Error(Errc::kIntegrityFailure,
                "sequence " + std::to_string(packet.header.sequence) + " replayed", Cause::kReplay);
  }
  HeaderBytes associated = encode_header(packet.header);
  crypto::Nonce nonce =
      crypto::derive_nonce(crypto::opposite(s.direction_), packet.header.sequence);
  MediaPacket out;
  out.body = crypto::open_payload(*s.key_, nonce, associated, packet.body, s.suite_);
  out.header = packet.header;
  out.header.encrypted = false;
  s.mark_received(packet.header.sequence);
  s.notify(model::EventKind::kFrameDecrypted);
  return out;
}

}  // namespace vpvn::media
