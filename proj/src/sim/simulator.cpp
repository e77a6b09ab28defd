#include "vpvn/sim/simulator.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <queue>
#include <random>
#include <set>
#include <sstream>

#include "vpvn/crypto/entropy.hpp"
#include "vpvn/kdc/messages.hpp"

namespace vpvn::sim {

using model::EventKind;

std::string_view to_string(SessionStatus status) {
  switch (status) {
    case SessionStatus::kPending: return "pending";
    case SessionStatus::kEstablished: return "established";
    case SessionStatus::kCompleted: return "completed";
    case SessionStatus::kRejected: return "rejected";
    case SessionStatus::kKdcUnreachable: return "kdc-unreachable";
  }
  return "unknown";
}

model::EventLog SimulationReport::session_log(std::size_t session) const {
  model::EventLog out;
  for (std::size_t leg : sessions.at(session).legs) {
    out.insert(out.end(), legs[leg].log.begin(), legs[leg].log.end());
  }
  return out;
}

bool SimulationReport::conformant() const {
  return std::all_of(legs.begin(), legs.end(),
                     [](const LegReport& l) { return !l.verdict || l.verdict->accepted; });
}

namespace {

void render_stats(std::ostream& out, const char* label, const DirectionStats& s) {
  out << ' ' << label << " sent=" << s.sent << " delivered=" << s.delivered
      << " dropped=" << s.dropped << " integrity_failed=" << s.integrity_failed;
}

}  // namespace

std::string SimulationReport::render() const {
  std::ostringstream out;
  for (const SessionOutcome& s : sessions) {
    out << "# session " << s.name << ' ' << s.initiator << " -> " << s.responder
        << " status=" << to_string(s.status) << " frames=" << s.frames_offered
        << " delivered=" << s.frames_delivered << '\n';
    for (std::size_t i : s.legs) out << model::format_log(legs[i].log);
    for (std::size_t i : s.legs) {
      const LegReport& l = legs[i];
      out << "# stats " << model::format_session_id(l.session_id) << ' ' << l.initiator << " -> "
          << l.responder << " generation=" << l.generation;
      render_stats(out, "forward", l.forward);
      render_stats(out, "reverse", l.reverse);
      out << '\n';
      out << "# conformance " << model::format_session_id(l.session_id) << ' '
          << (l.verdict ? model::describe(*l.verdict) : "skipped (" + l.skip_reason + ")") << '\n';
    }
  }
  return out.str();
}

struct Simulator::Impl {
  struct NodeRuntime {
    crypto::KeyPair keys;
    std::unique_ptr<crypto::SeededEntropy> entropy;
    std::map<std::uint64_t, media::SessionState> states;
    // Gateways: inner user -> session carrying that user's traffic.
    std::map<std::string, std::uint64_t> routes;
  };

  struct Leg {
    std::uint64_t id = 0;
    std::string initiator;
    std::string responder;
    std::size_t owner = 0;
    media::RekeyPolicy policy;
    std::size_t replay_window = 0;
    model::EventLog log;
    DirectionStats stats[2];
    bool busy = false;
    bool failed = false;
    Errc failure = Errc::kRejected;
    std::uint64_t attempt = 0;
    int retries = 0;
    std::string requester;
    kdc::RequestPurpose purpose = kdc::RequestPurpose::kNewSession;
    std::uint32_t target_generation = 0;
    std::vector<std::function<void(bool)>> waiting;
  };

  struct SessionRuntime {
    SessionOutcome outcome;
    SessionOptions options;
    std::string ends[2];  // initiator endpoint, responder endpoint
    std::vector<Frame> frames;
    std::vector<std::size_t> ordinal;  // 1-based media position, 0 for signaling
    std::size_t media_total = 0;
    std::size_t finished = 0;
    std::set<std::pair<std::size_t, std::size_t>> forced_done;  // (leg, frame)
    bool closed = false;
    bool sent_any = false;
    std::size_t legs_ready = 0;
  };

  struct Scheduled {
    std::uint64_t time;
    std::uint64_t seq;
    std::function<void()> action;
  };
  struct Later {
    bool operator()(const Scheduled& a, const Scheduled& b) const {
      return std::tie(a.time, a.seq) > std::tie(b.time, b.seq);
    }
  };

  Topology topo;
  media::RekeyPolicy policy;
  std::uint64_t now = 0;
  std::uint64_t next_seq = 0;
  std::priority_queue<Scheduled, std::vector<Scheduled>, Later> queue;
  std::mt19937_64 link_rng;
  std::map<std::string, NodeRuntime> nodes;
  std::unique_ptr<kdc::Kdc> kdc;
  std::unique_ptr<crypto::SeededEntropy> kdc_entropy;
  std::map<std::pair<std::string, std::string>, std::vector<Capture>> captures;
  std::map<std::pair<std::string, std::string>, std::vector<std::string>> paths;
  std::vector<Leg> legs;
  std::vector<SessionRuntime> sessions;
  std::vector<crypto::SessionKey> installed;

  Impl(Topology t, media::RekeyPolicy p) : topo(std::move(t)), policy(p), link_rng(topo.seed) {
    const NodeSpec& k = topo.kdc();
    for (const NodeSpec& n : topo.nodes) {
      NodeRuntime rt;
      crypto::SeededEntropy key_source(topo.seed, "keys/" + n.id);
      rt.keys = crypto::gen_keypair(key_source);
      rt.entropy = std::make_unique<crypto::SeededEntropy>(topo.seed, "node/" + n.id);
      nodes.emplace(n.id, std::move(rt));
    }
    kdc = std::make_unique<kdc::Kdc>(k.id, nodes.at(k.id).keys);
    kdc_entropy = std::make_unique<crypto::SeededEntropy>(topo.seed, "kdc/" + k.id);
    for (const NodeSpec& n : topo.nodes) {
      if (n.role != NodeRole::kPoint && n.role != NodeRole::kGateway) continue;
      kdc::SubscriberRecord rec;
      rec.id = n.id;
      rec.role = n.role == NodeRole::kGateway ? kdc::SubscriberRole::kGateway
                                              : kdc::SubscriberRole::kPoint;
      rec.public_point = nodes.at(n.id).keys.public_point;
      for (const AclEntry& e : topo.acl) {
        if (e.subscriber != n.id) continue;
        for (const std::string& peer : e.peers) {
          if (peer == "*") rec.all_peers = true;
          else rec.peers.insert(peer);
        }
      }
      kdc->register_subscriber(std::move(rec));
    }
  }

  // Event loop.

  void schedule(std::uint64_t at, std::function<void()> action) {
    queue.push({at, next_seq++, std::move(action)});
  }

  void run_until_idle() {
    while (!queue.empty()) {
      Scheduled next = queue.top();
      queue.pop();
      now = next.time;
      next.action();
    }
  }

  // Links.

  const std::vector<std::string>& path(const std::string& from, const std::string& to) {
    auto key = std::pair{from, to};
    if (auto it = paths.find(key); it != paths.end()) return it->second;
    std::map<std::string, std::vector<std::string>> adjacent;
    for (const LinkSpec& l : topo.links) {
      adjacent[l.a].push_back(l.b);
      adjacent[l.b].push_back(l.a);
    }
    for (auto& [_, v] : adjacent) std::sort(v.begin(), v.end());
    std::map<std::string, std::string> parent{{from, from}};
    std::deque<std::string> frontier{from};
    while (!frontier.empty() && !parent.contains(to)) {
      std::string cur = frontier.front();
      frontier.pop_front();
      for (const std::string& next : adjacent[cur]) {
        if (parent.emplace(next, cur).second) frontier.push_back(next);
      }
    }
    if (!parent.contains(to)) throw Error(Errc::kDisconnected, "no route from " + from + " to " + to);
    std::vector<std::string> route{to};
    while (route.back() != from) route.push_back(parent.at(route.back()));
    std::reverse(route.begin(), route.end());
    return paths.emplace(key, std::move(route)).first->second;
  }

  static std::pair<std::string, std::string> link_key(const std::string& a, const std::string& b) {
    return a < b ? std::pair{a, b} : std::pair{b, a};
  }

  // Sends `bytes` hop by hop. Exactly one of the callbacks runs, at the time
  // the packet arrives or would have.
  void transmit(const std::string& from, const std::string& to, Bytes bytes,
                std::function<void(Bytes)> arrive, std::function<void()> lost) {
    auto route = std::make_shared<std::vector<std::string>>(path(from, to));
    hop(route, 0, std::move(bytes), std::move(arrive), std::move(lost));
  }

  void hop(std::shared_ptr<std::vector<std::string>> route, std::size_t i, Bytes bytes,
           std::function<void(Bytes)> arrive, std::function<void()> lost) {
    const std::string& a = (*route)[i];
    const std::string& b = (*route)[i + 1];
    const LinkSpec& l = *topo.link(a, b);
    captures[link_key(a, b)].push_back({now, a, b, bytes});
    bool dropped = false;
    if (l.loss > 0.0) {
      double u = static_cast<double>(link_rng() >> 11) * 0x1.0p-53;
      dropped = u < l.loss;
    }
    std::uint64_t delay = l.latency;
    if (l.reorder > 0) delay += link_rng() % (l.reorder + 1);
    if (dropped) {
      schedule(now + l.latency, std::move(lost));
    } else if (i + 2 == route->size()) {
      schedule(now + delay, [arrive = std::move(arrive), bytes = std::move(bytes)]() mutable {
        arrive(std::move(bytes));
      });
    } else {
      schedule(now + delay, [this, route, i, bytes = std::move(bytes), arrive = std::move(arrive),
                             lost = std::move(lost)]() mutable {
        hop(route, i + 1, std::move(bytes), std::move(arrive), std::move(lost));
      });
    }
  }

  // Party state.

  void log(Leg& leg, const std::string& node, EventKind kind) {
    leg.log.push_back({now, node, leg.id, kind});
  }

  media::SessionState& state(std::size_t li, const std::string& node) {
    Leg& leg = legs[li];
    auto& states = nodes.at(node).states;
    auto it = states.find(leg.id);
    if (it == states.end()) {
      auto dir = node == leg.initiator ? crypto::Direction::kInitiator : crypto::Direction::kResponder;
      it = states
               .emplace(std::piecewise_construct, std::forward_as_tuple(leg.id),
                        std::forward_as_tuple(leg.id, dir, leg.policy, leg.replay_window, topo.cipher))
               .first;
      it->second.set_observer([this, li, node](EventKind kind) { log(legs[li], node, kind); });
    }
    return it->second;
  }

  // Handshake with retries.

  void handshake(std::size_t li, const std::string& requester, kdc::RequestPurpose purpose,
                 std::function<void(bool)> done) {
    Leg& leg = legs[li];
    leg.waiting.push_back(std::move(done));
    if (leg.busy) return;
    leg.busy = true;
    leg.retries = 0;
    leg.requester = requester;
    leg.purpose = purpose;
    log(leg, requester, EventKind::kSessionRequested);
    send_request(li);
  }

  void send_request(std::size_t li) {
    Leg& leg = legs[li];
    std::uint64_t attempt = ++leg.attempt;
    NodeRuntime& node = nodes.at(leg.requester);
    const std::string& peer = leg.requester == leg.initiator ? leg.responder : leg.initiator;
    kdc::KeyRequest request =
        kdc::make_key_request(leg.requester, node.keys, kdc->public_point(), leg.id,
                              node.entropy->next_u64(), {leg.purpose, peer}, *node.entropy);
    auto packet = media::make_packet(media::PacketType::kKeyMgmt, kdc::encode_message(request));
    transmit(
        leg.requester, kdc->id(), media::encode_packet(packet),
        [this, li, attempt](Bytes bytes) { kdc_receive(li, attempt, bytes); },
        [this, li, attempt] { retry(li, attempt); });
  }

  void retry(std::size_t li, std::uint64_t attempt) {
    Leg& leg = legs[li];
    if (!leg.busy || attempt != leg.attempt) return;
    ++leg.attempt;
    if (++leg.retries > 3) {
      finish_handshake(li, false, Errc::kKdcUnreachable);
      return;
    }
    schedule(now + (std::uint64_t{1} << (leg.retries - 1)), [this, li] { send_request(li); });
  }

  static kdc::KdcMessage unpack(ByteView bytes) {
    return kdc::decode_message(media::decode_packet(bytes).body);
  }

  void kdc_receive(std::size_t li, std::uint64_t attempt, const Bytes& bytes) {
    auto request = std::get<kdc::KeyRequest>(unpack(bytes));
    kdc::KdcResult result;
    try {
      result = kdc->handle_key_request(request, *kdc_entropy, now);
    } catch (const Error& e) {
      if (e.code() != Errc::kMalformedRequest) throw;
      retry(li, attempt);
      return;
    }
    Leg& leg = legs[li];
    leg.log.insert(leg.log.end(), result.events.begin(), result.events.end());
    if (!result.granted()) {
      auto reply = media::make_packet(media::PacketType::kKeyMgmt,
                                      kdc::encode_message(result.rejection()));
      transmit(
          kdc->id(), leg.requester, media::encode_packet(reply),
          [this, li, attempt](Bytes) {
            if (legs[li].busy && attempt == legs[li].attempt) {
              finish_handshake(li, false, Errc::kRejected);
            }
          },
          [this, li, attempt] { retry(li, attempt); });
      return;
    }
    const kdc::KeyGrant& grant = result.grant();
    leg.target_generation = grant.generation;
    auto reply = media::encode_packet(
        media::make_packet(media::PacketType::kKeyMgmt, kdc::encode_message(grant)));
    for (const std::string& party : {grant.initiator, grant.responder}) {
      transmit(
          kdc->id(), party, reply, [this, li, party](Bytes b) { install(li, party, b); },
          [this, li, attempt] { retry(li, attempt); });
    }
  }

  void install(std::size_t li, const std::string& party, const Bytes& bytes) {
    auto grant = std::get<kdc::KeyGrant>(unpack(bytes));
    crypto::SessionKey key = crypto::unwrap_session_key(grant.for_party(party), nodes.at(party).keys);
    media::SessionState& s = state(li, party);
    try {
      media::install_key(s, key);
      installed.push_back(key);
    } catch (const Error& e) {
      if (e.code() != Errc::kStaleGeneration) throw;
    }
    Leg& leg = legs[li];
    if (leg.busy && state(li, leg.initiator).generation() == leg.target_generation &&
        state(li, leg.responder).generation() == leg.target_generation) {
      finish_handshake(li, true, Errc::kRejected);
    }
  }

  void finish_handshake(std::size_t li, bool ok, Errc failure) {
    Leg& leg = legs[li];
    leg.busy = false;
    ++leg.attempt;
    if (!ok) {
      leg.failed = true;
      leg.failure = failure;
    }
    auto waiting = std::move(leg.waiting);
    leg.waiting.clear();
    for (auto& w : waiting) w(ok);
  }

  // Sessions.

  std::uint64_t fresh_session_id(const std::string& initiator) {
    for (;;) {
      std::uint64_t id = nodes.at(initiator).entropy->next_u64();
      bool taken = id == 0 || std::any_of(legs.begin(), legs.end(),
                                          [id](const Leg& l) { return l.id == id; });
      if (!taken) return id;
    }
  }

  std::size_t open_session(const std::string& initiator, const std::string& responder,
                           SessionOptions options) {
    for (const std::string& end : {initiator, responder}) {
      const NodeSpec* n = topo.find(end);
      if (!n || n->role == NodeRole::kKdc) {
        throw Error(Errc::kSchemaError, "session endpoint " + end + " is not a subscriber");
      }
    }
    std::vector<std::string> chain{topo.subscriber_of(initiator).id};
    for (const std::string& g : options.via) {
      const NodeSpec* n = topo.find(g);
      if (!n || n->role != NodeRole::kGateway) {
        throw Error(Errc::kSchemaError, "via entry " + g + " is not a gateway");
      }
      chain.push_back(g);
    }
    chain.push_back(topo.subscriber_of(responder).id);
    for (std::size_t i = 1; i < chain.size(); ++i) {
      if (chain[i] == chain[i - 1]) {
        throw Error(Errc::kSchemaError, "session hop from " + chain[i] + " to itself");
      }
    }

    std::size_t si = sessions.size();
    SessionRuntime s;
    s.outcome.name = options.name.empty() ? "s" + std::to_string(si + 1) : options.name;
    s.outcome.initiator = initiator;
    s.outcome.responder = responder;
    s.ends[0] = initiator;
    s.ends[1] = responder;
    for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
      Leg leg;
      leg.id = fresh_session_id(chain[i]);
      leg.initiator = chain[i];
      leg.responder = chain[i + 1];
      leg.owner = si;
      leg.policy = options.rekey_policy.value_or(policy);
      leg.replay_window = options.replay_window;
      s.outcome.legs.push_back(legs.size());
      legs.push_back(std::move(leg));
    }
    s.options = std::move(options);
    sessions.push_back(std::move(s));

    for (std::size_t li : sessions[si].outcome.legs) {
      handshake(li, legs[li].initiator, kdc::RequestPurpose::kNewSession,
                [this, si, li](bool ok) { leg_established(si, li, ok); });
    }
    return si;
  }

  void leg_established(std::size_t si, std::size_t li, bool ok) {
    SessionRuntime& s = sessions[si];
    if (s.outcome.status != SessionStatus::kPending) return;
    if (!ok) {
      s.outcome.status = legs[li].failure == Errc::kKdcUnreachable ? SessionStatus::kKdcUnreachable
                                                                   : SessionStatus::kRejected;
      s.closed = true;
      return;
    }
    if (++s.legs_ready < s.outcome.legs.size()) return;
    s.outcome.status = SessionStatus::kEstablished;
    for (int side = 0; side < 2; ++side) {
      const NodeSpec* n = topo.find(s.ends[side]);
      if (n->role != NodeRole::kInnerUser) continue;
      std::size_t li_edge = side == 0 ? s.outcome.legs.front() : s.outcome.legs.back();
      nodes.at(n->gateway).routes[n->id] = legs[li_edge].id;
    }
  }

  std::size_t leg_at(const SessionRuntime& s, std::size_t step, bool reverse) const {
    const auto& l = s.outcome.legs;
    return reverse ? l[l.size() - 1 - step] : l[step];
  }

  bool last_media(const SessionRuntime& s, std::size_t k) const {
    return s.ordinal[k] == s.media_total;
  }

  void start_frames(std::size_t si, std::vector<Frame> frames) {
    SessionRuntime& s = sessions[si];
    s.frames = std::move(frames);
    s.sent_any = true;
    s.finished = 0;
    s.ordinal.assign(s.frames.size(), 0);
    s.media_total = 0;
    for (std::size_t k = 0; k < s.frames.size(); ++k) {
      if (media::is_media(s.frames[k].type)) s.ordinal[k] = ++s.media_total;
    }
    if (s.frames.empty()) {
      close(si);
      return;
    }
    if (s.options.pacing == Pacing::kBurst) {
      for (std::size_t k = 0; k < s.frames.size(); ++k) {
        schedule(now + k, [this, si, k] { send_frame(si, k); });
      }
    } else {
      schedule(now, [this, si] { send_frame(si, 0); });
    }
  }

  void send_frame(std::size_t si, std::size_t k) {
    SessionRuntime& s = sessions[si];
    const Frame& f = s.frames[k];
    ++s.outcome.frames_offered;
    auto packet = media::make_packet(f.type, f.payload, f.priority, f.qos);
    const std::string& source = s.ends[f.reverse ? 1 : 0];
    const NodeSpec* n = topo.find(source);
    if (n->role == NodeRole::kInnerUser) {
      transmit(
          source, n->gateway, media::encode_packet(packet),
          [this, si, k](Bytes b) { leg_send(si, k, 0, media::decode_packet(b)); },
          [this, si, k] { frame_done(si, k, false); });
    } else {
      leg_send(si, k, 0, packet);
    }
  }

  void leg_send(std::size_t si, std::size_t k, std::size_t step, media::MediaPacket packet) {
    SessionRuntime& s = sessions[si];
    const bool reverse = s.frames[k].reverse;
    const std::size_t li = leg_at(s, step, reverse);
    Leg& leg = legs[li];
    if (leg.failed) {
      frame_done(si, k, false);
      return;
    }
    if (leg.busy) {
      leg.waiting.push_back([this, si, k, step, packet](bool ok) {
        if (ok) leg_send(si, k, step, packet);
        else frame_done(si, k, false);
      });
      return;
    }
    const std::string sender = reverse ? leg.responder : leg.initiator;
    const std::string receiver = reverse ? leg.initiator : leg.responder;
    media::SessionState& st = state(li, sender);
    const bool is_media = media::is_media(packet.header.type);

    if (is_media && contains(s.options.rekey_before_frames, s.ordinal[k]) &&
        s.forced_done.emplace(li, s.ordinal[k]).second) {
      st.request_rekey();
    }
    media::MediaPacket out;
    try {
      out = media::protect(packet, st);
    } catch (const Error& e) {
      if (e.code() != Errc::kRekeyRequired) throw;
      log(leg, sender, EventKind::kRekeyBeforeEncrypt);
      handshake(li, sender, kdc::RequestPurpose::kRekey, [this, si, k, step, packet](bool ok) {
        if (ok) leg_send(si, k, step, packet);
        else frame_done(si, k, false);
      });
      return;
    }
    const int dir = reverse ? 1 : 0;
    if (is_media) {
      log(leg, sender, EventKind::kFrameSent);
      ++leg.stats[dir].sent;
    }
    transmit(
        sender, receiver, media::encode_packet(out),
        [this, si, k, step](Bytes b) { leg_receive(si, k, step, b); },
        [this, si, k, li, dir, sender, is_media] {
          if (is_media) {
            ++legs[li].stats[dir].dropped;
            log_decision(si, k, li, sender);
          }
          frame_done(si, k, false);
        });
  }

  static bool contains(const std::vector<std::size_t>& v, std::size_t x) {
    return std::find(v.begin(), v.end(), x) != v.end();
  }

  void log_decision(std::size_t si, std::size_t k, std::size_t li, const std::string& node) {
    log(legs[li], node,
        last_media(sessions[si], k) ? EventKind::kSessionEnd : EventKind::kSessionContinue);
  }

  void leg_receive(std::size_t si, std::size_t k, std::size_t step, const Bytes& bytes) {
    SessionRuntime& s = sessions[si];
    const bool reverse = s.frames[k].reverse;
    const std::size_t li = leg_at(s, step, reverse);
    const int dir = reverse ? 1 : 0;
    Leg& leg = legs[li];
    const std::string receiver = reverse ? leg.initiator : leg.responder;
    media::MediaPacket packet = media::decode_packet(bytes);
    if (!media::is_media(packet.header.type)) {
      forward(si, k, step, packet);
      return;
    }
    log(leg, receiver, EventKind::kFrameReceived);
    media::SessionState& st = state(li, receiver);
    media::MediaPacket plain;
    try {
      plain = media::unprotect(packet, st);
    } catch (const Error& e) {
      if (e.code() != Errc::kIntegrityFailure && e.code() != Errc::kNoSessionKey &&
          e.code() != Errc::kLengthMismatch) {
        throw;
      }
      ++leg.stats[dir].integrity_failed;
      log_decision(si, k, li, receiver);
      frame_done(si, k, false);
      return;
    }
    ++leg.stats[dir].delivered;
    const bool remaining = !last_media(s, k);
    bool forced = contains(s.options.rekey_after_frames, s.ordinal[k]) &&
                  s.forced_done.emplace(li, s.ordinal[k] + (1ull << 32)).second;
    if (remaining && (forced || media::rekey_due(st))) {
      log(leg, receiver, EventKind::kRekeyAfterDecrypt);
      handshake(li, receiver, kdc::RequestPurpose::kRekey, [this, si, k, step, plain](bool ok) {
        if (ok) forward(si, k, step, plain);
        else frame_done(si, k, false);
      });
      return;
    }
    log(leg, receiver, EventKind::kKeyStillValid);
    log_decision(si, k, li, receiver);
    forward(si, k, step, plain);
  }

  static media::MediaPacket for_inner(media::MediaPacket p) {
    p.header.session_id = 0;
    p.header.sequence = 0;
    return p;
  }

  void forward(std::size_t si, std::size_t k, std::size_t step, const media::MediaPacket& plain) {
    SessionRuntime& s = sessions[si];
    const bool reverse = s.frames[k].reverse;
    if (step + 1 < s.outcome.legs.size()) {
      leg_send(si, k, step + 1, plain);
      return;
    }
    const std::string& sink = s.ends[reverse ? 0 : 1];
    const NodeSpec* n = topo.find(sink);
    if (n->role != NodeRole::kInnerUser) {
      frame_done(si, k, true);
      return;
    }
    transmit(
        n->gateway, sink, media::encode_packet(for_inner(plain)),
        [this, si, k](Bytes) { frame_done(si, k, true); },
        [this, si, k] { frame_done(si, k, false); });
  }

  void frame_done(std::size_t si, std::size_t k, bool delivered) {
    SessionRuntime& s = sessions[si];
    if (delivered) ++s.outcome.frames_delivered;
    ++s.finished;
    if (s.finished == s.frames.size()) {
      close(si);
    } else if (s.options.pacing == Pacing::kStopAndWait) {
      schedule(now, [this, si, k] { send_frame(si, k + 1); });
    }
  }

  void close(std::size_t si) {
    SessionRuntime& s = sessions[si];
    if (s.closed) return;
    s.closed = true;
    if (s.outcome.status == SessionStatus::kEstablished) s.outcome.status = SessionStatus::kCompleted;
  }

  // Report.

  bool lossless(const std::string& a, const std::string& b) {
    const auto& route = path(a, b);
    for (std::size_t i = 0; i + 1 < route.size(); ++i) {
      if (topo.link(route[i], route[i + 1])->loss > 0.0) return false;
    }
    return true;
  }

  SimulationReport report() {
    SimulationReport r;
    for (const SessionRuntime& s : sessions) r.sessions.push_back(s.outcome);
    for (std::size_t li = 0; li < legs.size(); ++li) {
      const Leg& leg = legs[li];
      const SessionRuntime& s = sessions[leg.owner];
      LegReport out;
      out.session_id = leg.id;
      out.initiator = leg.initiator;
      out.responder = leg.responder;
      out.log = leg.log;
      out.forward = leg.stats[0];
      out.reverse = leg.stats[1];
      const auto& states = nodes.at(leg.initiator).states;
      if (auto it = states.find(leg.id); it != states.end()) out.generation = it->second.generation();

      const std::string& k = kdc->id();
      if (s.options.pacing == Pacing::kBurst) {
        out.skip_reason = "burst pacing";
      } else if (!lossless(leg.initiator, leg.responder) || !lossless(leg.initiator, k) ||
                 !lossless(leg.responder, k)) {
        out.skip_reason = "lossy links";
      } else {
        bool complete = leg.failed || (s.outcome.status == SessionStatus::kCompleted && s.media_total > 0);
        out.verdict = model::conformance_check(
            leg.log, complete ? model::CheckMode::kComplete : model::CheckMode::kPrefix);
      }
      r.legs.push_back(std::move(out));
    }
    return r;
  }

  std::vector<Frame> scenario_frames(const SessionSpec& spec) {
    crypto::SeededEntropy payloads(topo.seed, "payload/" + spec.name);
    std::vector<Frame> frames;
    for (std::size_t k = 0; k < spec.frames; ++k) {
      Frame f;
      f.type = spec.type;
      f.priority = spec.priority;
      f.qos = spec.qos;
      f.payload.resize(spec.frame_size);
      payloads.fill(f.payload);
      f.reverse = spec.direction == FlowDirection::kReverse ||
                  (spec.direction == FlowDirection::kAlternate && k % 2 == 1);
      frames.push_back(std::move(f));
    }
    return frames;
  }
};

Simulator::Simulator(Topology topology, media::RekeyPolicy policy)
    : impl_(std::make_unique<Impl>(std::move(topology), policy)) {}
Simulator::~Simulator() = default;
Simulator::Simulator(Simulator&&) noexcept = default;
Simulator& Simulator::operator=(Simulator&&) noexcept = default;

const Topology& Simulator::topology() const { return impl_->topo; }
std::uint64_t Simulator::now() const { return impl_->now; }
const kdc::Kdc& Simulator::kdc() const { return *impl_->kdc; }

Establishment Simulator::establish_session(const std::string& initiator,
                                           const std::string& responder, SessionOptions options) {
  std::size_t si = impl_->open_session(initiator, responder, std::move(options));
  impl_->run_until_idle();
  const auto& s = impl_->sessions[si];
  Establishment e;
  e.handle = si;
  for (std::size_t li : s.outcome.legs) {
    e.session_ids.push_back(impl_->legs[li].id);
    const auto& log = impl_->legs[li].log;
    e.log.insert(e.log.end(), log.begin(), log.end());
  }
  if (s.outcome.status != SessionStatus::kEstablished) {
    std::uint64_t failed = 0;
    Errc code = Errc::kRejected;
    for (std::size_t li : s.outcome.legs) {
      if (impl_->legs[li].failed) {
        failed = impl_->legs[li].id;
        code = impl_->legs[li].failure;
        break;
      }
    }
    throw SessionFailure(code,
                         code == Errc::kRejected ? initiator + " -> " + responder + " rejected"
                                                 : "kdc unreachable",
                         failed, e.log);
  }
  return e;
}

SimulationReport Simulator::send_media(std::size_t handle, std::vector<Frame> frames) {
  if (handle >= impl_->sessions.size() || impl_->sessions[handle].closed ||
      impl_->sessions[handle].outcome.status != SessionStatus::kEstablished) {
    throw Error(Errc::kSessionClosed, "session is not open");
  }
  impl_->start_frames(handle, std::move(frames));
  impl_->run_until_idle();
  return impl_->report();
}

void Simulator::close_session(std::size_t handle) {
  if (handle >= impl_->sessions.size()) throw Error(Errc::kSessionClosed, "no such session");
  impl_->close(handle);
}

SimulationReport Simulator::run_scenario(const std::vector<SessionSpec>& specs) {
  for (const SessionSpec& spec : specs) {
    SessionOptions o;
    o.name = spec.name;
    o.via = spec.via;
    o.pacing = spec.pacing;
    o.rekey_before_frames = spec.rekey_before_frames;
    o.rekey_after_frames = spec.rekey_after_frames;
    o.rekey_policy = spec.rekey_policy;
    o.replay_window = spec.replay_window;
    std::size_t si = impl_->open_session(spec.initiator, spec.responder, std::move(o));
    impl_->run_until_idle();
    if (impl_->sessions[si].outcome.status != SessionStatus::kEstablished) continue;
    impl_->start_frames(si, impl_->scenario_frames(spec));
    impl_->run_until_idle();
  }
  return impl_->report();
}

SimulationReport Simulator::report() const { return impl_->report(); }

std::vector<Capture> Simulator::wire_tap(const std::string& a, const std::string& b) const {
  auto it = impl_->captures.find(Impl::link_key(a, b));
  return it == impl_->captures.end() ? std::vector<Capture>{} : it->second;
}

media::MediaPacket Simulator::gateway_forward(const std::string& gateway,
                                              const std::string& inner_user,
                                              const media::MediaPacket& packet) {
  const NodeSpec* g = impl_->topo.find(gateway);
  const NodeSpec* u = impl_->topo.find(inner_user);
  if (!g || g->role != NodeRole::kGateway || !u || u->gateway != gateway) {
    throw Error(Errc::kNoGatewaySession, inner_user + " is not an inner user of " + gateway);
  }
  auto& node = impl_->nodes.at(gateway);
  if (!packet.header.encrypted) {
    auto route = node.routes.find(inner_user);
    if (route == node.routes.end() || !node.states.contains(route->second)) {
      throw Error(Errc::kNoGatewaySession, gateway + " has no session for " + inner_user);
    }
    return media::protect(packet, node.states.at(route->second));
  }
  auto st = node.states.find(packet.header.session_id);
  if (st == node.states.end()) {
    throw Error(Errc::kNoGatewaySession,
                gateway + " holds no session " + model::format_session_id(packet.header.session_id));
  }
  return Impl::for_inner(media::unprotect(packet, st->second));
}

const media::SessionState* Simulator::session_state(const std::string& node,
                                                    std::uint64_t session_id) const {
  auto n = impl_->nodes.find(node);
  if (n == impl_->nodes.end()) return nullptr;
  auto it = n->second.states.find(session_id);
  return it == n->second.states.end() ? nullptr : &it->second;
}

std::vector<crypto::SessionKey> Simulator::installed_keys() const { return impl_->installed; }

SimulationReport run_scenario(const Scenario& scenario) {
  Simulator sim(scenario.topology, scenario.rekey_policy);
  return sim.run_scenario(scenario.sessions);
}

}  // namespace vpvn::sim
