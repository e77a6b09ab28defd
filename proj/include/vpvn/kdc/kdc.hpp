#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <variant>

#include "vpvn/crypto/keys.hpp"
#include "vpvn/kdc/messages.hpp"
#include "vpvn/model/events.hpp"

namespace vpvn::kdc {

enum class SubscriberRole : std::uint8_t { kPoint, kGateway };

struct SubscriberRecord {
  std::string id;
  SubscriberRole role = SubscriberRole::kPoint;
  crypto::PublicPoint public_point{};
  // Peers this subscriber may open sessions with.
  std::set<std::string> peers;
  bool all_peers = false;
};

// Outcome of a request plus the protocol events the KDC emitted for it.
struct KdcResult {
  std::variant<KeyGrant, Rejection> outcome;
  model::EventLog events;

  bool granted() const { return std::holds_alternative<KeyGrant>(outcome); }
  const KeyGrant& grant() const { return std::get<KeyGrant>(outcome); }
  const Rejection& rejection() const { return std::get<Rejection>(outcome); }
};

struct SessionRecord {
  std::string initiator;
  std::string responder;
  std::uint32_t generation = 0;
};

inline constexpr std::size_t kReplayWindow = 64;

// Single logical KDC. Not thread-safe; one writer drives it.
class Kdc {
 public:
  Kdc(std::string id, crypto::KeyPair keys);

  const std::string& id() const { return id_; }
  const crypto::PublicPoint& public_point() const { return keys_.public_point; }

  // Throws Error(kDuplicateSubscriber).
  void register_subscriber(SubscriberRecord record);
  std::size_t registry_size() const { return registry_.size(); }
  const SubscriberRecord* find_subscriber(const std::string& id) const;

  // 1 iff both ids are registered and `peer` is in the requester's rights.
  bool authorize(const std::string& requester, const std::string& peer) const;

  // Throws Error(kMalformedRequest) if the envelope does not open.
  KdcResult handle_key_request(const KeyRequest& request, crypto::EntropySource& entropy,
                               std::uint64_t now = 0);

  // New key, generation + 1, after re-authorizing the original pair.
  // Throws Error(kUnknownSession) or Error(kNotAParty).
  KdcResult rekey(std::uint64_t session_id, const std::string& requester,
                  crypto::EntropySource& entropy, std::uint64_t now = 0);

  const SessionRecord* find_session(std::uint64_t session_id) const;

 private:
  KdcResult reject(const std::string& requester, std::uint64_t session, std::uint64_t nonce,
                   RejectCause cause, std::uint64_t now) const;
  KdcResult grant(std::uint64_t session, SessionRecord& record, crypto::EntropySource& entropy,
                  std::uint64_t now) const;
  // False if the nonce was already seen inside the window.
  bool admit_nonce(const std::string& requester, std::uint64_t nonce);

  struct ReplayWindow {
    std::deque<std::uint64_t> order;
    std::unordered_set<std::uint64_t> seen;
  };

  std::string id_;
  crypto::KeyPair keys_;
  std::map<std::string, SubscriberRecord> registry_;
  std::map<std::string, ReplayWindow> replay_;
  std::map<std::uint64_t, SessionRecord> sessions_;
};

}  // namespace vpvn::kdc
