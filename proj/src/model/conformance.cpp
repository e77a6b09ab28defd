#include "vpvn/model/conformance.hpp"

#include <utility>

#include "vpvn/error.hpp"
#include "vpvn/model/envpvn.hpp"

namespace vpvn::model {

enet::Firing event_firing(EventKind kind) {
  using enet::kOnlyBranch;
  switch (kind) {
    case EventKind::kSessionRequested: return {"t1", kOnlyBranch};
    case EventKind::kAuthDecidedOk: return {"t2", branch::kAuthorized};
    case EventKind::kAuthDecidedFail: return {"t2", branch::kRejected};
    case EventKind::kKeyGenerated: return {"t3", kOnlyBranch};
    case EventKind::kRequestRejected: return {"t4", kOnlyBranch};
    case EventKind::kKeyWrapped: return {"t5", kOnlyBranch};
    case EventKind::kKeyDelivered: return {"t6", kOnlyBranch};
    case EventKind::kFrameEncrypted: return {"t7", branch::kKeyValid};
    case EventKind::kRekeyBeforeEncrypt: return {"t7", branch::kRekey};
    case EventKind::kFrameSent: return {"t8", kOnlyBranch};
    case EventKind::kFrameReceived: return {"t9", kOnlyBranch};
    case EventKind::kFrameDecrypted: return {"t10", kOnlyBranch};
    case EventKind::kKeyStillValid: return {"t11", branch::kKeyValid};
    case EventKind::kRekeyAfterDecrypt: return {"t11", branch::kRekey};
    case EventKind::kSessionContinue: return {"t12", branch::kContinue};
    case EventKind::kSessionEnd: return {"t12", branch::kEnd};
  }
  throw Error(Errc::kUnknownEventKind,
              "event kind " + std::to_string(static_cast<int>(kind)));
}

namespace {

// Projection that remembers which event produced each firing.
std::vector<std::pair<enet::Firing, std::size_t>> project_indexed(const EventLog& log) {
  std::vector<std::pair<enet::Firing, std::size_t>> out;
  for (std::size_t i = 0; i < log.size(); ++i) {
    bool dual_wrap = log[i].kind == EventKind::kKeyWrapped && i > 0 &&
                     log[i - 1].kind == EventKind::kKeyWrapped;
    if (dual_wrap) continue;
    out.emplace_back(event_firing(log[i].kind), i);
  }
  return out;
}

const enet::Net& structural_net() {
  static const enet::Net net = enet::build_net(en_vpvn());
  return net;
}

}  // namespace

std::vector<enet::Firing> project_events(const EventLog& log) {
  std::vector<enet::Firing> out;
  for (auto& [firing, index] : project_indexed(log)) out.push_back(std::move(firing));
  return out;
}

std::string describe(const Verdict& v) {
  if (v.accepted) return "Accept";
  std::string out = "Reject at step " + std::to_string(v.step);
  if (v.offending) out += ": " + enet::to_string(*v.offending) + " not enabled";
  else out += ": session did not terminate";
  if (v.event_index) out += " (event " + std::to_string(*v.event_index + 1) + ")";
  out += "; enabled {";
  for (std::size_t i = 0; i < v.expected.size(); ++i) {
    out += (i ? ", " : "") + enet::to_string(v.expected[i]);
  }
  return out + "}";
}

Verdict conformance_check(const EventLog& log, CheckMode mode) {
  for (const ProtocolEvent& e : log) {
    if (e.session != log.front().session) {
      throw Error(Errc::kMalformed, "log mixes sessions " + format_session_id(log.front().session) +
                                        " and " + format_session_id(e.session));
    }
  }
  const enet::Net& net = structural_net();
  enet::Marking marking = net.initial_marking();
  auto firings = project_indexed(log);
  for (std::size_t i = 0; i < firings.size(); ++i) {
    const auto& [firing, event_index] = firings[i];
    std::vector<enet::Firing> candidates = enet::enabled(net, marking);
    bool ok = false;
    for (const enet::Firing& c : candidates) ok = ok || c == firing;
    if (!ok) {
      return Verdict{false, i + 1, std::move(candidates), firing, event_index};
    }
    marking = enet::fire(net, marking, firing.transition, firing.branch, i + 1).first;
  }
  if (mode == CheckMode::kComplete && !marking.empty()) {
    return Verdict{false, firings.size() + 1, enet::enabled(net, marking), std::nullopt,
                   std::nullopt};
  }
  return Verdict{};
}

}  // namespace vpvn::model
