#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vpvn::model {

enum class EventKind : std::uint8_t {
  kSessionRequested,
  kAuthDecidedOk,
  kAuthDecidedFail,
  kKeyGenerated,
  kRequestRejected,
  kKeyWrapped,
  kKeyDelivered,
  kRekeyBeforeEncrypt,
  kFrameEncrypted,
  kFrameSent,
  kFrameReceived,
  kFrameDecrypted,
  kRekeyAfterDecrypt,
  kKeyStillValid,
  kSessionContinue,
  kSessionEnd,
};

inline constexpr std::size_t kEventKindCount = 16;

// Log spelling, e.g. "AuthDecided(ok)".
std::string_view to_string(EventKind kind);
// Throws Error(kUnknownEventKind).
EventKind parse_event_kind(std::string_view text);

struct ProtocolEvent {
  std::uint64_t timestamp = 0;
  std::string node;
  std::uint64_t session = 0;
  EventKind kind = EventKind::kSessionRequested;

  friend bool operator==(const ProtocolEvent&, const ProtocolEvent&) = default;
};

using EventLog = std::vector<ProtocolEvent>;

std::string format_session_id(std::uint64_t session);

// `timestamp node session kind`, session as 16 lowercase hex digits.
std::string format_event(const ProtocolEvent& event);
std::string format_log(const EventLog& log);

// Blank lines and `#` comments are skipped. Syntax errors throw
// Error(kMalformed); unknown kinds throw Error(kUnknownEventKind).
ProtocolEvent parse_event(std::string_view line);
EventLog parse_log(std::string_view text);

// Groups events by session id, preserving order inside each group.
std::map<std::uint64_t, EventLog> split_by_session(const EventLog& log);

}  // namespace vpvn::model
