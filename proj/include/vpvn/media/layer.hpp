#pragma once

// The encryption/decryption layer between signaling and the media codecs:
// AUDIO and VIDEO payloads are sealed under the session key with the
// cleartext header as associated data; SIGNALING and KEYMGMT pass through.

#include <cstdint>
#include <functional>
#include <optional>

#include "vpvn/crypto/keys.hpp"
#include "vpvn/media/packet.hpp"
#include "vpvn/model/events.hpp"

namespace vpvn::media {

struct RekeyPolicy {
  std::uint64_t max_packets = 10'000;
  std::uint64_t max_bytes = 64ull << 20;

  friend bool operator==(const RekeyPolicy&, const RekeyPolicy&) = default;
};

inline constexpr std::size_t kMaxReplayWindow = 64;

// One party's view of a session. `direction` is the nonce direction this
// party sends with; received frames use the opposite one.
class SessionState {
 public:
  // replay_window 0 is a strict high-water mark; up to 64 allows that many
  // sequences below the highest one seen.
  SessionState(std::uint64_t session_id, crypto::Direction direction, RekeyPolicy policy = {},
               std::size_t replay_window = 0,
               crypto::CipherSuite suite = crypto::CipherSuite::kAes256Gcm);

  std::uint64_t session_id() const { return session_id_; }
  crypto::Direction direction() const { return direction_; }
  const RekeyPolicy& policy() const { return policy_; }
  crypto::CipherSuite suite() const { return suite_; }

  bool has_key() const { return key_.has_value(); }
  std::uint32_t generation() const { return key_ ? key_->generation : 0; }

  std::uint64_t packets_since_rekey() const { return packets_since_rekey_; }
  std::uint64_t bytes_since_rekey() const { return bytes_since_rekey_; }
  std::uint64_t next_send_sequence() const { return next_send_; }
  std::optional<std::uint64_t> receive_high_water() const { return highest_received_; }

  // Makes rekey_due report 1 until the next install.
  void request_rekey() { rekey_requested_ = true; }

  // Called with FrameEncrypted / FrameDecrypted.
  void set_observer(std::function<void(model::EventKind)> observer) {
    observer_ = std::move(observer);
  }

 private:
  friend MediaPacket protect(const MediaPacket&, SessionState&);
  friend MediaPacket unprotect(const MediaPacket&, SessionState&);
  friend bool rekey_due(const SessionState&);
  friend void install_key(SessionState&, const crypto::SessionKey&);

  bool replayed(std::uint64_t sequence) const;
  void mark_received(std::uint64_t sequence);
  void notify(model::EventKind kind) const {
    if (observer_) observer_(kind);
  }

  std::uint64_t session_id_;
  crypto::Direction direction_;
  RekeyPolicy policy_;
  std::size_t replay_window_;
  crypto::CipherSuite suite_;

  std::optional<crypto::SessionKey> key_;
  crypto::NonceHighWater guard_;
  std::uint64_t next_send_ = 0;
  std::uint64_t packets_since_rekey_ = 0;
  std::uint64_t bytes_since_rekey_ = 0;
  bool rekey_requested_ = false;
  std::optional<std::uint64_t> highest_received_;
  std::uint64_t received_bitmap_ = 0;  // bit i: highest - i was received
  std::function<void(model::EventKind)> observer_;
};

// Errors: kNoSessionKey, kRekeyRequired (the pre-encrypt check said rekey).
MediaPacket protect(const MediaPacket& packet, SessionState& state);

// Errors: kNoSessionKey, kIntegrityFailure (cause kReplay for sequences
// outside the replay window, or a non-media packet flagged encrypted),
// kLengthMismatch.
MediaPacket unprotect(const MediaPacket& packet, SessionState& state);

// 1 iff the packet or byte budget of the current key is used up, or a rekey
// was requested.
bool rekey_due(const SessionState& state);

// Throws Error(kStaleGeneration) unless the generation increases, and
// Error(kMalformed) for a key of another session.
void install_key(SessionState& state, const crypto::SessionKey& key);

}  // namespace vpvn::media
