#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vpvn/bytes.hpp"
#include "vpvn/error.hpp"
#include "vpvn/kdc/kdc.hpp"
#include "vpvn/media/layer.hpp"
#include "vpvn/model/conformance.hpp"
#include "vpvn/model/events.hpp"
#include "vpvn/sim/topology.hpp"

namespace vpvn::sim {

// One packet as it crossed a link, in transmission order.
struct Capture {
  std::uint64_t time = 0;
  std::string from;
  std::string to;
  Bytes bytes;
};

struct DirectionStats {
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  std::uint64_t integrity_failed = 0;

  bool balanced() const { return sent == delivered + dropped + integrity_failed; }
  friend bool operator==(const DirectionStats&, const DirectionStats&) = default;
};

// One KDC session: a point-to-point pair or a single gateway hop.
struct LegReport {
  std::uint64_t session_id = 0;
  std::string initiator;
  std::string responder;
  model::EventLog log;
  DirectionStats forward;  // initiator to responder
  DirectionStats reverse;
  std::uint32_t generation = 0;
  // Empty when the run was not eligible for checking (lossy links, burst
  // pacing); skip_reason says why.
  std::optional<model::Verdict> verdict;
  std::string skip_reason;
};

enum class SessionStatus : std::uint8_t {
  kPending,
  kEstablished,
  kCompleted,
  kRejected,
  kKdcUnreachable,
};

std::string_view to_string(SessionStatus status);

struct SessionOutcome {
  std::string name;
  std::string initiator;
  std::string responder;
  SessionStatus status = SessionStatus::kPending;
  std::vector<std::size_t> legs;  // indices into SimulationReport::legs
  std::uint64_t frames_offered = 0;
  std::uint64_t frames_delivered = 0;  // reached the far endpoint intact
};

struct SimulationReport {
  std::vector<SessionOutcome> sessions;
  std::vector<LegReport> legs;

  // Events of every leg of one session, leg by leg.
  model::EventLog session_log(std::size_t session) const;
  // No checked leg was rejected.
  bool conformant() const;
  // Event lines per session followed by a stats footer.
  std::string render() const;
};

struct Frame {
  media::PacketType type = media::PacketType::kVideo;
  Bytes payload;
  std::uint8_t priority = 0;
  std::uint8_t qos = 0;
  // Responder to initiator.
  bool reverse = false;
};

struct SessionOptions {
  std::string name;
  std::vector<std::string> via;
  Pacing pacing = Pacing::kStopAndWait;
  std::vector<std::size_t> rekey_before_frames;
  std::vector<std::size_t> rekey_after_frames;
  std::optional<media::RekeyPolicy> rekey_policy;
  std::size_t replay_window = 0;
};

struct Establishment {
  std::size_t handle = 0;
  // One id per leg, initiator side first.
  std::vector<std::uint64_t> session_ids;
  model::EventLog log;
};

// Thrown by establish_session with code kRejected or kKdcUnreachable.
class SessionFailure : public Error {
 public:
  SessionFailure(Errc code, const std::string& what, std::uint64_t session_id, model::EventLog log)
      : Error(code, what), session_id_(session_id), log_(std::move(log)) {}

  std::uint64_t session_id() const { return session_id_; }
  const model::EventLog& log() const { return log_; }

 private:
  std::uint64_t session_id_;
  model::EventLog log_;
};

class Simulator {
 public:
  explicit Simulator(Topology topology, media::RekeyPolicy policy = {});
  ~Simulator();
  Simulator(Simulator&&) noexcept;
  Simulator& operator=(Simulator&&) noexcept;

  const Topology& topology() const;
  std::uint64_t now() const;

  // Runs the handshake for every leg to completion.
  // Throws SessionFailure (kRejected, kKdcUnreachable) or Error(kSchemaError)
  // for endpoints that cannot form a session.
  Establishment establish_session(const std::string& initiator, const std::string& responder,
                                  SessionOptions options = {});

  // Sends the frames and runs until they are delivered or lost.
  // Throws Error(kSessionClosed) after close_session or a failed handshake.
  SimulationReport send_media(std::size_t handle, std::vector<Frame> frames);
  void close_session(std::size_t handle);

  // Establishes and drives every session in order, one after another.
  SimulationReport run_scenario(const std::vector<SessionSpec>& sessions);

  SimulationReport report() const;

  std::vector<Capture> wire_tap(const std::string& a, const std::string& b) const;

  // What the gateway does to a packet from or for one of its inner users:
  // cleartext media is protected under the gateway session carrying that
  // user's traffic, protected media is unprotected by the session named in
  // its header. Throws Error(kNoGatewaySession).
  media::MediaPacket gateway_forward(const std::string& gateway, const std::string& inner_user,
                                     const media::MediaPacket& packet);

  // Party state, for inspection. Null if the node holds no such session.
  const media::SessionState* session_state(const std::string& node,
                                           std::uint64_t session_id) const;
  // Every session key any party installed during the run.
  std::vector<crypto::SessionKey> installed_keys() const;
  const kdc::Kdc& kdc() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Runs scenario.sessions on a fresh simulator.
SimulationReport run_scenario(const Scenario& scenario);

}  // namespace vpvn::sim
