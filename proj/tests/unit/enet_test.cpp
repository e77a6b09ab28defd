#include <gtest/gtest.h>

#include <random>

#include "vpvn/enet/net.hpp"
#include "vpvn/model/envpvn.hpp"

namespace vpvn::enet {
namespace {

TransitionDef simple(std::string id, std::vector<std::string> in, std::optional<std::string> out) {
  return {std::move(id), std::move(in), {{kOnlyBranch, std::move(out)}}, std::nullopt, ""};
}

TransitionDef switched(std::string id, std::string in, std::string resolver,
                       std::optional<std::string> on1, std::optional<std::string> on0) {
  return {std::move(id), {std::move(in)}, {{1, std::move(on1)}, {0, std::move(on0)}},
          std::move(resolver), ""};
}

std::vector<Errc> codes(const NetDefinition& def) {
  try {
    build_net(def);
  } catch (const NetDefinitionError& e) {
    std::vector<Errc> out;
    for (const Issue& i : e.issues()) out.push_back(i.code);
    return out;
  }
  return {};
}

bool has(const std::vector<Errc>& v, Errc c) { return std::find(v.begin(), v.end(), c) != v.end(); }

TEST(BuildNet, DegenerateNetIsValid) {
  NetDefinition def{"one", {"p"}, {}, {}, {}, {}};
  Net net = build_net(def);
  EXPECT_TRUE(net.initial_marking().empty());
  EXPECT_EQ(reachable_markings(net).size(), 1u);
}

TEST(BuildNet, EnVpvnCounts) {
  Net net = build_net(model::en_vpvn());
  EXPECT_EQ(net.definition().positions.size(), 12u);
  EXPECT_EQ(net.definition().resolving.size(), 4u);
  EXPECT_EQ(net.definition().transitions.size(), 12u);
  EXPECT_EQ(net.input_arc("bp1", "t1"), 1);
  EXPECT_EQ(net.input_arc("b1", "t1"), 0);
  EXPECT_EQ(net.output_arc("t7", "bp1"), 1);
  EXPECT_EQ(net.output_arc("t12", "b6"), 1);
  EXPECT_TRUE(net.is_resolving("br3"));
  EXPECT_FALSE(net.is_resolving("b3"));
}

TEST(BuildNet, TwoOutputsWithoutResolver) {
  NetDefinition def{"n", {"a", "b", "c"}, {}, {}, {}, {"a"}};
  TransitionDef t = switched("t", "a", "r", "b", "c");
  t.resolver.reset();
  def.transitions.push_back(t);
  EXPECT_TRUE(has(codes(def), Errc::kBadBranching));
}

TEST(BuildNet, SingleOutputWithResolver) {
  NetDefinition def{"n", {"a", "b"}, {}, {"r"}, {}, {}};
  TransitionDef t = simple("t", {"a"}, "b");
  t.resolver = "r";
  def.transitions.push_back(t);
  EXPECT_TRUE(has(codes(def), Errc::kBadBranching));
}

TEST(BuildNet, SwitchNeedsBothTags) {
  NetDefinition def{"n", {"a", "b", "c"}, {}, {"r"}, {}, {}};
  TransitionDef t = switched("t", "a", "r", "b", "c");
  t.outputs[1].branch = 1;
  def.transitions.push_back(t);
  EXPECT_TRUE(has(codes(def), Errc::kBadBranching));
}

TEST(BuildNet, DuplicateIds) {
  NetDefinition def{"n", {"a", "a"}, {}, {}, {}, {}};
  EXPECT_TRUE(has(codes(def), Errc::kDuplicateId));
  NetDefinition clash{"n", {"a", "t"}, {}, {}, {simple("t", {"a"}, std::nullopt)}, {}};
  EXPECT_TRUE(has(codes(clash), Errc::kDuplicateId));
  NetDefinition resolving_clash{"n", {"a", "r"}, {}, {"r"}, {}, {}};
  EXPECT_TRUE(has(codes(resolving_clash), Errc::kDuplicateId));
}

TEST(BuildNet, DanglingArcs) {
  NetDefinition in{"n", {"a"}, {}, {}, {simple("t", {"x"}, "a")}, {}};
  EXPECT_TRUE(has(codes(in), Errc::kDanglingArc));
  NetDefinition out{"n", {"a"}, {}, {}, {simple("t", {"a"}, "y")}, {}};
  EXPECT_TRUE(has(codes(out), Errc::kDanglingArc));
  NetDefinition res{"n", {"a", "b"}, {}, {}, {switched("t", "a", "r", "b", std::nullopt)}, {}};
  EXPECT_TRUE(has(codes(res), Errc::kDanglingArc));
  NetDefinition init{"n", {"a"}, {}, {}, {}, {"zz"}};
  EXPECT_TRUE(has(codes(init), Errc::kDanglingArc));
}

TEST(BuildNet, UnsafeInitial) {
  NetDefinition def{"n", {"a"}, {}, {}, {}, {"a", "a"}};
  EXPECT_TRUE(has(codes(def), Errc::kUnsafeInitial));
}

TEST(BuildNet, ReportsEveryIssue) {
  NetDefinition def{"n", {"a", "a"}, {}, {}, {simple("t", {"x"}, "a")}, {"a", "a"}};
  auto c = codes(def);
  EXPECT_TRUE(has(c, Errc::kDuplicateId));
  EXPECT_TRUE(has(c, Errc::kDanglingArc));
  EXPECT_TRUE(has(c, Errc::kUnsafeInitial));
}

TEST(BuildNet, TransitionWithoutInputs) {
  NetDefinition def{"n", {"a"}, {}, {}, {simple("t", {}, "a")}, {}};
  EXPECT_FALSE(codes(def).empty());
}

class EnVpvnStructure : public ::testing::Test {
 protected:
  Net net = build_net(model::en_vpvn());

  Marking at(const std::string& p) const {
    Marking m;
    m.put(p, Token{});
    return m;
  }
};

TEST_F(EnVpvnStructure, InitialEnablesOnlyT1) {
  for (int br : {0, 1}) {
    Resolutions all{{"br1", br}, {"br2", br}, {"br3", br}, {"br4", br}};
    EXPECT_EQ(enabled(net, net.initial_marking(), all), (std::vector<Firing>{{"t1", kOnlyBranch}}));
  }
}

TEST_F(EnVpvnStructure, EmptyMarkingEnablesNothing) {
  EXPECT_TRUE(enabled(net, Marking{}).empty());
}

TEST_F(EnVpvnStructure, ResolutionSelectsBranch) {
  EXPECT_EQ(enabled(net, at("b1"), {{"br1", 1}}), (std::vector<Firing>{{"t2", 1}}));
  EXPECT_EQ(enabled(net, at("b1"), {{"br1", 0}}), (std::vector<Firing>{{"t2", 0}}));
  EXPECT_EQ(enabled(net, at("b1")).size(), 2u);
}

TEST_F(EnVpvnStructure, FireMovesToken) {
  Token seed;
  seed.set("x", std::int64_t{1});
  Marking m = net.initial_marking(seed);
  auto [next, record] = fire(net, m, "t1", kOnlyBranch);
  EXPECT_FALSE(next.occupied("bp1"));
  EXPECT_TRUE(next.occupied("b1"));
  EXPECT_EQ(record.before, seed);
  EXPECT_EQ(record.transition, "t1");
}

TEST_F(EnVpvnStructure, FireOnEmptyMarking) {
  try {
    fire(net, Marking{}, "t1", kOnlyBranch);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kNotEnabled);
  }
}

TEST_F(EnVpvnStructure, FireWrongBranch) {
  EXPECT_THROW(fire(net, at("b1"), "t2", kOnlyBranch), Error);
  EXPECT_THROW(fire(net, at("b1"), "t2", 7), Error);
}

TEST_F(EnVpvnStructure, EndBranchAbsorbs) {
  auto [next, record] = fire(net, at("b11"), "t12", model::branch::kEnd);
  EXPECT_TRUE(next.empty());
  EXPECT_EQ(record.branch, 1);
}

TEST_F(EnVpvnStructure, RejectBranchAbsorbsAtT4) {
  auto [m2, r2] = fire(net, at("b1"), "t2", 0);
  EXPECT_TRUE(m2.occupied("b3"));
  auto [m3, r3] = fire(net, m2, "t4", kOnlyBranch);
  EXPECT_TRUE(m3.empty());
}

TEST_F(EnVpvnStructure, ReachableMarkings) {
  auto reach = reachable_markings(net);
  EXPECT_EQ(reach.size(), 13u);
  std::set<std::string> live;
  for (const PlaceSet& m : reach) {
    EXPECT_LE(m.size(), 1u);
    live.insert(m.begin(), m.end());
  }
  EXPECT_EQ(live.size(), 12u);
  EXPECT_TRUE(reach.contains(PlaceSet{}));
}

TEST_F(EnVpvnStructure, ReachableSetClosedUnderFire) {
  auto reach = reachable_markings(net);
  for (const PlaceSet& places : reach) {
    Marking m;
    for (const std::string& p : places) m.put(p, Token{});
    for (const Firing& f : enabled(net, m)) {
      auto [next, _] = fire(net, m, f.transition, f.branch);
      EXPECT_TRUE(reach.contains(next.places())) << to_string(f);
    }
  }
}

TEST_F(EnVpvnStructure, ConflictFreeUnderFixedResolutions) {
  for (int mask = 0; mask < 16; ++mask) {
    Resolutions r{{"br1", mask & 1}, {"br2", (mask >> 1) & 1}, {"br3", (mask >> 2) & 1},
                  {"br4", (mask >> 3) & 1}};
    for (const PlaceSet& places : reachable_markings(net)) {
      Marking m;
      for (const std::string& p : places) m.put(p, Token{});
      EXPECT_LE(enabled(net, m, r).size(), 1u);
    }
  }
}

TEST_F(EnVpvnStructure, StateExplosionCap) {
  try {
    reachable_markings(net, 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kStateExplosion);
  }
}

TEST(Run, HappyPathSequence) {
  Net net = model::vpvn_net();
  model::SessionToken s;
  s.frames_remaining = 1;
  RunResult r = run(net, net.initial_marking(model::to_token(s)), model::vpvn_resolver(), 10000);
  std::vector<std::string> seq;
  for (const FiringRecord& f : r.trace) seq.push_back(f.transition);
  EXPECT_EQ(seq, (std::vector<std::string>{"t1", "t2", "t3", "t5", "t6", "t7", "t8", "t9", "t10",
                                           "t11", "t12"}));
  EXPECT_TRUE(r.final_marking.empty());
  for (std::size_t i = 0; i < r.trace.size(); ++i) EXPECT_EQ(r.trace[i].step, i + 1);
}

TEST(Run, ScriptedResolutionsMatchModelResolver) {
  Net net = build_net(model::en_vpvn());
  RunResult r = run(net, net.initial_marking(),
                    resolver_from({{"br1", 1}, {"br2", 0}, {"br3", 0}, {"br4", 1}}), 10000);
  ASSERT_EQ(r.trace.size(), 11u);
  EXPECT_EQ(r.trace[1].branch, 1);
  EXPECT_EQ(r.trace.back().transition, "t12");
}

TEST(Run, RejectedPath) {
  Net net = build_net(model::en_vpvn());
  RunResult r = run(net, net.initial_marking(), resolver_from({{"br1", 0}}), 10000);
  ASSERT_EQ(r.trace.size(), 3u);
  EXPECT_EQ(r.trace[0].transition, "t1");
  EXPECT_EQ(r.trace[1].transition, "t2");
  EXPECT_EQ(r.trace[1].branch, 0);
  EXPECT_EQ(r.trace[2].transition, "t4");
  EXPECT_TRUE(r.final_marking.empty());
}

TEST(Run, ZeroSteps) {
  Net net = build_net(model::en_vpvn());
  Marking m = net.initial_marking();
  RunResult r = run(net, m, resolver_from({}), 0);
  EXPECT_TRUE(r.trace.empty());
  EXPECT_EQ(r.final_marking, m);
}

TEST(Run, UnresolvedSwitchIsNondeterministic) {
  Net net = build_net(model::en_vpvn());
  try {
    run(net, net.initial_marking(), resolver_from({}), 10000);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kNondeterminism);
  }
}

TEST(Run, TraceFormat) {
  Net net = build_net(model::en_vpvn());
  Token seed;
  seed.set("who", std::string("a"));
  seed.set("n", std::int64_t{2});
  seed.set("ok", true);
  RunResult r = run(net, net.initial_marking(seed), resolver_from({{"br1", 0}}), 10000);
  EXPECT_EQ(format_record(r.trace[0]), "1 t1 - {n=2,ok=true,who=a}");
  EXPECT_EQ(format_record(r.trace[1]), "2 t2 0 {n=2,ok=true,who=a}");
}

TEST(Run, Deterministic) {
  Net net = model::vpvn_net();
  model::SessionToken s;
  s.frames_remaining = 4;
  s.forced_pre_rekeys = 0b0100;
  s.forced_post_rekeys = 0b0001;
  auto once = [&] {
    std::string out;
    for (const auto& f : run(net, net.initial_marking(model::to_token(s)), model::vpvn_resolver(), 10000).trace) {
      out += format_record(f) + "\n";
    }
    return out;
  };
  EXPECT_EQ(once(), once());
}

TEST(Marking, PutTwiceIsUnsafe) {
  Marking m;
  m.put("a", Token{});
  EXPECT_THROW(m.put("a", Token{}), Error);
}

// Random nets: chains of joins and switches over a handful of positions.
// Every firing must keep the net safe and conserve tokens.
TEST(Properties, RandomNetsStaySafeAndConserveTokens) {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 5);
    NetDefinition def;
    def.name = "random";
    for (int i = 0; i < n; ++i) def.positions.push_back("p" + std::to_string(i));
    def.resolving = {"r"};
    auto pos = [&] { return def.positions[rng() % n]; };
    const int transitions = 2 + static_cast<int>(rng() % 5);
    for (int t = 0; t < transitions; ++t) {
      std::string id = "t" + std::to_string(t);
      std::vector<std::string> in{pos()};
      if (rng() % 3 == 0) {
        std::string second = pos();
        if (second != in[0]) in.push_back(second);
      }
      auto out = [&]() -> std::optional<std::string> {
        if (rng() % 4 == 0) return std::nullopt;
        return pos();
      };
      if (rng() % 2 == 0 && in.size() == 1) {
        def.transitions.push_back(switched(id, in[0], "r", out(), out()));
      } else {
        def.transitions.push_back(simple(id, in, out()));
      }
    }
    std::set<std::string> init;
    for (int i = 0; i < n; ++i) {
      if (rng() % 2 == 0) init.insert(def.positions[i]);
    }
    def.initial.assign(init.begin(), init.end());
    Net net = build_net(def);

    Marking m = net.initial_marking();
    for (int step = 0; step < 30; ++step) {
      int coin = static_cast<int>(rng() % 2);
      auto options = enabled(net, m, Resolutions{{"r", coin}});
      if (options.empty()) break;
      const Firing& f = options[rng() % options.size()];
      const TransitionDef& t = net.transition(f.transition);
      auto [next, _] = fire(net, m, f.transition, f.branch);
      bool absorbs = false;
      for (const OutputBranch& b : t.outputs) {
        if (b.branch == f.branch) absorbs = !b.position.has_value();
      }
      EXPECT_EQ(next.token_count() + t.inputs.size(), m.token_count() + (absorbs ? 0 : 1));
      for (const std::string& p : def.positions) {
        EXPECT_LE(next.occupancy().count(p), 1u);
      }
      m = std::move(next);
    }
  }
}

TEST(Properties, EnabledFireCoherence) {
  Net net = build_net(model::en_vpvn());
  for (const PlaceSet& places : reachable_markings(net)) {
    Marking m;
    for (const std::string& p : places) m.put(p, Token{});
    Resolutions r{{"br1", 1}, {"br2", 0}, {"br3", 1}, {"br4", 0}};
    auto on = enabled(net, m, r);
    for (const TransitionDef& t : net.definition().transitions) {
      for (const OutputBranch& b : t.outputs) {
        bool listed = std::find(on.begin(), on.end(), Firing{t.id, b.branch}) != on.end();
        bool resolved_ok = !t.resolver || r.at(*t.resolver) == b.branch;
        bool fires = true;
        try {
          fire(net, m, t.id, b.branch);
        } catch (const Error&) {
          fires = false;
        }
        EXPECT_EQ(listed, fires && resolved_ok) << t.id << "/" << b.branch;
      }
    }
  }
}

TEST(Properties, EnVpvnTokenCountIsOneUntilAbsorbed) {
  Net net = model::vpvn_net();
  model::SessionToken s;
  s.frames_remaining = 3;
  s.forced_pre_rekeys = 0b010;
  Marking m = net.initial_marking(model::to_token(s));
  auto resolver = model::vpvn_resolver();
  for (std::size_t step = 1;; ++step) {
    auto f = enabled(net, m, resolver);
    if (f.empty()) break;
    bool absorbing = (f[0].transition == "t4") || (f[0].transition == "t12" && f[0].branch == 1);
    m = fire(net, m, f[0].transition, f[0].branch, step).first;
    EXPECT_EQ(m.token_count(), absorbing ? 0u : 1u);
  }
  EXPECT_TRUE(m.empty());
}

}  // namespace
}  // namespace vpvn::enet
