#include "vpvn/kdc/kdc.hpp"

#include "vpvn/error.hpp"

namespace vpvn::kdc {

using model::EventKind;

Kdc::Kdc(std::string id, crypto::KeyPair keys) : id_(std::move(id)), keys_(std::move(keys)) {}

void Kdc::register_subscriber(SubscriberRecord record) {
  if (registry_.contains(record.id)) {
    throw Error(Errc::kDuplicateSubscriber, record.id);
  }
  crypto::validate_public_point(record.public_point);
  std::string id = record.id;
  registry_.emplace(std::move(id), std::move(record));
}

const SubscriberRecord* Kdc::find_subscriber(const std::string& id) const {
  auto it = registry_.find(id);
  return it == registry_.end() ? nullptr : &it->second;
}

bool Kdc::authorize(const std::string& requester, const std::string& peer) const {
  const SubscriberRecord* r = find_subscriber(requester);
  if (r == nullptr || find_subscriber(peer) == nullptr || requester == peer) return false;
  return r->all_peers || r->peers.contains(peer);
}

const SessionRecord* Kdc::find_session(std::uint64_t session_id) const {
  auto it = sessions_.find(session_id);
  return it == sessions_.end() ? nullptr : &it->second;
}

bool Kdc::admit_nonce(const std::string& requester, std::uint64_t nonce) {
  ReplayWindow& w = replay_[requester];
  if (w.seen.contains(nonce)) return false;
  w.order.push_back(nonce);
  w.seen.insert(nonce);
  if (w.order.size() > kReplayWindow) {
    w.seen.erase(w.order.front());
    w.order.pop_front();
  }
  return true;
}

KdcResult Kdc::reject(const std::string& requester, std::uint64_t session, std::uint64_t nonce,
                      RejectCause cause, std::uint64_t now) const {
  KdcResult result{Rejection{requester, session, nonce, cause}, {}};
  result.events.push_back({now, id_, session, EventKind::kAuthDecidedFail});
  result.events.push_back({now, id_, session, EventKind::kRequestRejected});
  return result;
}

KdcResult Kdc::grant(std::uint64_t session, SessionRecord& record,
                     crypto::EntropySource& entropy, std::uint64_t now) const {
  ++record.generation;
  crypto::SessionKey key = crypto::gen_session_key(entropy, session, record.generation);
  const SubscriberRecord& initiator = registry_.at(record.initiator);
  const SubscriberRecord& responder = registry_.at(record.responder);

  KeyGrant g;
  g.session_id = session;
  g.generation = record.generation;
  g.initiator = record.initiator;
  g.responder = record.responder;
  g.for_initiator =
      crypto::wrap_session_key(key, initiator.public_point, record.initiator, entropy);
  g.for_responder =
      crypto::wrap_session_key(key, responder.public_point, record.responder, entropy);

  KdcResult result{std::move(g), {}};
  for (EventKind kind : {EventKind::kAuthDecidedOk, EventKind::kKeyGenerated,
                         EventKind::kKeyWrapped, EventKind::kKeyWrapped,
                         EventKind::kKeyDelivered}) {
    result.events.push_back({now, id_, session, kind});
  }
  return result;
}

KdcResult Kdc::handle_key_request(const KeyRequest& request, crypto::EntropySource& entropy,
                                  std::uint64_t now) {
  const SubscriberRecord* requester = find_subscriber(request.requester);
  if (requester == nullptr) {
    return reject(request.requester, request.session_id, request.nonce,
                  RejectCause::kUnknownSubscriber, now);
  }
  RequestBody body = open_key_request(request, keys_, requester->public_point);
  if (!admit_nonce(request.requester, request.nonce)) {
    return reject(request.requester, request.session_id, request.nonce, RejectCause::kReplay,
                  now);
  }

  auto existing = sessions_.find(request.session_id);
  if (body.purpose == RequestPurpose::kRekey) {
    if (existing == sessions_.end()) throw Error(Errc::kUnknownSession, "rekey of unknown session");
    return rekey(request.session_id, request.requester, entropy, now);
  }
  if (existing != sessions_.end()) {
    // A retried request for a session already granted re-issues a key.
    const SessionRecord& s = existing->second;
    if (s.initiator == request.requester && s.responder == body.peer) {
      return rekey(request.session_id, request.requester, entropy, now);
    }
    return reject(request.requester, request.session_id, request.nonce,
                  RejectCause::kSessionConflict, now);
  }
  if (!authorize(request.requester, body.peer)) {
    return reject(request.requester, request.session_id, request.nonce,
                  RejectCause::kNotAuthorized, now);
  }
  SessionRecord& record =
      sessions_.emplace(request.session_id, SessionRecord{request.requester, body.peer, 0})
          .first->second;
  return grant(request.session_id, record, entropy, now);
}

KdcResult Kdc::rekey(std::uint64_t session_id, const std::string& requester,
                     crypto::EntropySource& entropy, std::uint64_t now) {
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) {
    throw Error(Errc::kUnknownSession, model::format_session_id(session_id));
  }
  SessionRecord& record = it->second;
  if (requester != record.initiator && requester != record.responder) {
    throw Error(Errc::kNotAParty, requester);
  }
  if (!authorize(record.initiator, record.responder)) {
    return reject(requester, session_id, 0, RejectCause::kNotAuthorized, now);
  }
  return grant(session_id, record, entropy, now);
}

}  // namespace vpvn::kdc
