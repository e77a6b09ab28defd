#include <gtest/gtest.h>

#include <set>

#include "vpvn/enet/net.hpp"
#include "vpvn/media/layer.hpp"
#include "vpvn/model/conformance.hpp"
#include "vpvn/model/envpvn.hpp"
#include "vpvn/model/events.hpp"

namespace vpvn::model {
namespace {

using K = EventKind;

EventLog make_log(std::initializer_list<EventKind> kinds, std::uint64_t session = 0xabc) {
  EventLog log;
  std::uint64_t t = 0;
  for (EventKind k : kinds) log.push_back({t++, "n", session, k});
  return log;
}

EventLog happy_one_frame() {
  return make_log({K::kSessionRequested, K::kAuthDecidedOk, K::kKeyGenerated, K::kKeyWrapped,
                   K::kKeyWrapped, K::kKeyDelivered, K::kFrameEncrypted, K::kFrameSent,
                   K::kFrameReceived, K::kFrameDecrypted, K::kKeyStillValid, K::kSessionEnd});
}

std::vector<std::string> names(const std::vector<enet::Firing>& firings) {
  std::vector<std::string> out;
  for (const auto& f : firings) out.push_back(f.transition);
  return out;
}

// Transition sequence of the engine running the model with the model's own
// resolver.
std::vector<enet::Firing> oracle(const SessionToken& s) {
  enet::Net net = vpvn_net();
  std::vector<enet::Firing> out;
  for (const auto& r : enet::run(net, net.initial_marking(to_token(s)), vpvn_resolver(), 10000).trace) {
    out.push_back({r.transition, r.branch});
  }
  return out;
}

TEST(EnVpvn, Shape) {
  enet::NetDefinition def = en_vpvn();
  EXPECT_EQ(def.transitions.size(), 12u);
  EXPECT_EQ(def.positions.size(), 12u);
  EXPECT_EQ(def.peripheral, std::vector<std::string>{"bp1"});
  std::map<std::string, std::string> resolver_of;
  for (const auto& t : def.transitions) {
    if (t.resolver) resolver_of[t.id] = *t.resolver;
  }
  EXPECT_EQ(resolver_of, (std::map<std::string, std::string>{
                             {"t2", "br1"}, {"t7", "br2"}, {"t11", "br3"}, {"t12", "br4"}}));
  for (std::size_t i = 0; i < def.transitions.size(); ++i) {
    EXPECT_EQ(def.transitions[i].procedure, ids::kPrimitives[i]);
  }
}

TEST(Resolve, Predicates) {
  SessionToken t;
  t.authorized = true;
  EXPECT_EQ(resolve("br1", t), 1);
  t.authorized = false;
  EXPECT_EQ(resolve("br1", t), 0);
  t.frames_remaining = 0;
  EXPECT_EQ(resolve("br4", t), 1);
  t.frames_remaining = 2;
  EXPECT_EQ(resolve("br4", t), 0);
  t.rekey_needed = true;
  EXPECT_EQ(resolve("br2", t), 1);
  EXPECT_EQ(resolve("br3", t), 1);
  try {
    resolve("br9", t);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kUnknownResolver);
  }
}

TEST(Resolve, Br2AtMediaLayerThreshold) {
  media::RekeyPolicy policy{4, 1 << 20};
  media::SessionState state(1, crypto::Direction::kInitiator, policy);
  crypto::SessionKey key;
  key.session_id = 1;
  media::install_key(state, key);
  SessionToken t;
  for (int i = 0; i < 4; ++i) {
    t.rekey_needed = media::rekey_due(state);
    EXPECT_EQ(resolve("br2", t), 0);
    media::protect(media::make_packet(media::PacketType::kAudio, Bytes(10)), state);
  }
  t.rekey_needed = media::rekey_due(state);
  EXPECT_EQ(resolve("br2", t), 1);

  // The model's own budget check agrees at the same threshold.
  enet::Net net = vpvn_net();
  SessionToken s;
  s.frames_remaining = 10;
  s.key_budget = 4;
  s.packets_since_key = 4;
  enet::Token token = to_token(s);
  net.apply_procedure(net.transition("t7"), token);
  EXPECT_EQ(resolve("br2", from_token(token)), 1);
}

TEST(Token, RoundTrip) {
  SessionToken s{"a", "b", true, "00ff", true, false, 3, 2, 1, 7, 9, 5, 1, 4};
  EXPECT_EQ(from_token(to_token(s)), s);
}

TEST(PathLength, ClosedForm) {
  EXPECT_EQ(happy_path_length(1, 0), 11u);
  EXPECT_EQ(happy_path_length(3, 0), 23u);
  EXPECT_EQ(happy_path_length(2, 1), 23u);
  EXPECT_THROW(happy_path_length(0, 0), std::invalid_argument);
  EXPECT_EQ(path_length(3, 0, 1), happy_path_length(3, 0) + 5 - 1);
}

TEST(PathLength, AgreesWithEngineRun) {
  for (std::int64_t frames = 1; frames <= 6; ++frames) {
    for (std::int64_t pre = 0; pre < (1 << frames); ++pre) {
      SessionToken s;
      s.frames_remaining = frames;
      s.forced_pre_rekeys = pre;
      std::size_t rekeys = static_cast<std::size_t>(__builtin_popcountll(pre));
      EXPECT_EQ(oracle(s).size(), happy_path_length(frames, rekeys)) << frames << " " << pre;
    }
    for (std::int64_t post = 0; post < (1 << frames); ++post) {
      SessionToken s;
      s.frames_remaining = frames;
      s.forced_post_rekeys = post;
      // Post-decrypt rekeys only fire while frames remain.
      std::int64_t effective = post & ((std::int64_t{1} << (frames - 1)) - 1);
      std::size_t n = static_cast<std::size_t>(__builtin_popcountll(effective));
      EXPECT_EQ(oracle(s).size(), path_length(frames, 0, n)) << frames << " " << post;
    }
  }
}

TEST(PathLength, BudgetRekeys) {
  SessionToken s;
  s.frames_remaining = 7;
  s.key_budget = 3;
  auto seq = oracle(s);
  // Frames 4 and 7 find the budget used up.
  EXPECT_EQ(seq.size(), happy_path_length(7, 2));
  EXPECT_EQ(std::count(seq.begin(), seq.end(), enet::Firing{"t7", branch::kRekey}), 2);
}

TEST(PathLength, RejectedSessionUsesNoKey) {
  enet::Net net = vpvn_net({[](const std::string&, const std::string&) { return false; }});
  SessionToken s;
  s.frames_remaining = 2;
  auto trace = enet::run(net, net.initial_marking(to_token(s)), vpvn_resolver(), 10000).trace;
  ASSERT_EQ(trace.size(), 3u);
  EXPECT_EQ(trace[2].transition, "t4");
  EXPECT_EQ(from_token(trace[2].after).generation, 0);
}

TEST(Events, KindNamesRoundTrip) {
  for (std::size_t i = 0; i < kEventKindCount; ++i) {
    auto k = static_cast<EventKind>(i);
    EXPECT_EQ(parse_event_kind(to_string(k)), k);
  }
  EXPECT_EQ(to_string(K::kAuthDecidedOk), "AuthDecided(ok)");
  EXPECT_THROW(parse_event_kind("FrameTeleported"), Error);
}

TEST(Events, LineFormat) {
  ProtocolEvent e{17, "point_a", 0x00ab, K::kFrameSent};
  EXPECT_EQ(format_event(e), "17 point_a 00000000000000ab FrameSent");
  EXPECT_EQ(parse_event(format_event(e)), e);
  EventLog log = happy_one_frame();
  EXPECT_EQ(parse_log("# comment\n\n" + format_log(log)), log);
}

TEST(Events, MalformedLines) {
  for (const char* line : {"x n 0000000000000001 FrameSent", "1 n zz FrameSent", "1 n",
                           "1 n 0000000000000001 FrameSent extra"}) {
    try {
      parse_event(line);
      ADD_FAILURE() << line;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::kMalformed) << line;
    }
  }
  try {
    parse_event("1 n 0000000000000001 Teleported");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kUnknownEventKind);
  }
}

TEST(Events, SplitBySession) {
  EventLog a = make_log({K::kSessionRequested}, 1);
  EventLog b = make_log({K::kSessionRequested, K::kAuthDecidedFail}, 2);
  EventLog mixed{b[0], a[0], b[1]};
  auto groups = split_by_session(mixed);
  ASSERT_EQ(groups.size(), 2u);
  EXPECT_EQ(groups[2], b);
}

TEST(Project, SingleEvent) {
  EXPECT_EQ(project_events(make_log({K::kSessionRequested})),
            (std::vector<enet::Firing>{{"t1", enet::kOnlyBranch}}));
}

TEST(Project, HappyPathMatchesEngine) {
  SessionToken s;
  s.frames_remaining = 1;
  EXPECT_EQ(project_events(happy_one_frame()), oracle(s));
  EXPECT_EQ(project_events(happy_one_frame()).size(), 11u);
}

TEST(Project, TotalMap) {
  for (std::size_t i = 0; i < kEventKindCount; ++i) {
    EXPECT_NO_THROW(event_firing(static_cast<EventKind>(i)));
  }
  auto f = project_events(make_log({K::kFrameSent}));
  EXPECT_EQ(names(f), std::vector<std::string>{"t8"});
}

TEST(Conformance, HappyPathAccepted) {
  Verdict v = conformance_check(happy_one_frame());
  EXPECT_TRUE(v.accepted) << describe(v);
}

TEST(Conformance, StartingWithFrameSent) {
  Verdict v = conformance_check(make_log({K::kFrameSent}));
  EXPECT_FALSE(v.accepted);
  EXPECT_EQ(v.step, 1u);
  EXPECT_EQ(v.offending, (enet::Firing{"t8", enet::kOnlyBranch}));
  EXPECT_EQ(v.expected, (std::vector<enet::Firing>{{"t1", enet::kOnlyBranch}}));
}

TEST(Conformance, ReceiveBeforeSend) {
  EventLog log = happy_one_frame();
  std::swap(log[7], log[8]);
  Verdict v = conformance_check(log);
  EXPECT_FALSE(v.accepted);
  EXPECT_EQ(v.step, 7u);
  EXPECT_EQ(v.offending->transition, "t9");
  EXPECT_EQ(v.event_index, 7u);
}

TEST(Conformance, MissingKeyDelivered) {
  EventLog log = happy_one_frame();
  log.erase(log.begin() + 5);
  Verdict v = conformance_check(log);
  EXPECT_FALSE(v.accepted);
  EXPECT_EQ(v.offending->transition, "t7");
}

TEST(Conformance, RejectedSession) {
  EventLog log = make_log({K::kSessionRequested, K::kAuthDecidedFail, K::kRequestRejected});
  EXPECT_TRUE(conformance_check(log).accepted);
  EXPECT_EQ(names(project_events(log)), (std::vector<std::string>{"t1", "t2", "t4"}));
}

TEST(Conformance, PrefixMode) {
  EventLog log = happy_one_frame();
  log.resize(6);
  EXPECT_FALSE(conformance_check(log).accepted);
  Verdict v = conformance_check(log, CheckMode::kPrefix);
  EXPECT_TRUE(v.accepted) << describe(v);
  EXPECT_TRUE(conformance_check({}, CheckMode::kPrefix).accepted);
  Verdict empty = conformance_check({});
  EXPECT_FALSE(empty.accepted);
  EXPECT_EQ(empty.step, 1u);
}

TEST(Conformance, MixedSessionsAreMalformed) {
  EventLog log = make_log({K::kSessionRequested}, 1);
  log.push_back({1, "n", 2, K::kAuthDecidedOk});
  try {
    conformance_check(log);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kMalformed);
  }
}

TEST(Conformance, EventsAfterAbsorption) {
  EventLog log = happy_one_frame();
  log.push_back({99, "n", 0xabc, K::kFrameEncrypted});
  Verdict v = conformance_check(log);
  EXPECT_FALSE(v.accepted);
  EXPECT_TRUE(v.expected.empty());
}

TEST(Conformance, EveryAdjacentTranspositionRejected) {
  EventLog base = happy_one_frame();
  for (std::size_t i = 0; i + 1 < base.size(); ++i) {
    if (base[i].kind == base[i + 1].kind) continue;
    EventLog log = base;
    std::swap(log[i].kind, log[i + 1].kind);
    EXPECT_FALSE(conformance_check(log).accepted) << i;
  }
}

TEST(Conformance, AcceptedLogsMatchEngineUnderRekeys) {
  // Build logs from engine traces and confirm the checker accepts exactly them.
  const std::map<std::string, std::vector<EventKind>> events_of = {
      {"t1", {K::kSessionRequested}},
      {"t2/1", {K::kAuthDecidedOk}},
      {"t2/0", {K::kAuthDecidedFail}},
      {"t3", {K::kKeyGenerated}},
      {"t4", {K::kRequestRejected}},
      {"t5", {K::kKeyWrapped, K::kKeyWrapped}},
      {"t6", {K::kKeyDelivered}},
      {"t7/1", {K::kRekeyBeforeEncrypt}},
      {"t7/0", {K::kFrameEncrypted}},
      {"t8", {K::kFrameSent}},
      {"t9", {K::kFrameReceived}},
      {"t10", {K::kFrameDecrypted}},
      {"t11/1", {K::kRekeyAfterDecrypt}},
      {"t11/0", {K::kKeyStillValid}},
      {"t12/1", {K::kSessionEnd}},
      {"t12/0", {K::kSessionContinue}},
  };
  for (std::int64_t pre = 0; pre < 8; ++pre) {
    for (std::int64_t post = 0; post < 8; ++post) {
      SessionToken s;
      s.frames_remaining = 3;
      s.forced_pre_rekeys = pre;
      s.forced_post_rekeys = post;
      auto seq = oracle(s);
      EventLog log;
      for (const auto& f : seq) {
        for (EventKind k : events_of.at(enet::to_string(f))) log.push_back({0, "n", 1, k});
      }
      EXPECT_EQ(project_events(log), seq);
      EXPECT_TRUE(conformance_check(log).accepted) << pre << " " << post;
    }
  }
}

TEST(Conformance, DescribeReject) {
  EventLog log = happy_one_frame();
  std::swap(log[7], log[8]);
  std::string text = describe(conformance_check(log));
  EXPECT_NE(text.find("Reject"), std::string::npos);
  EXPECT_NE(text.find("t9"), std::string::npos);
  EXPECT_EQ(describe(conformance_check(happy_one_frame())), "Accept");
}

}  // namespace
}  // namespace vpvn::model
