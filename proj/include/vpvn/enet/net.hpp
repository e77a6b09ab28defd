#pragma once

// Evaluation-net engine: safe nets with attributed tokens, simple and
// output-switched transitions, deterministic sequential firing and
// structural reachability.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "vpvn/error.hpp"

namespace vpvn::enet {

// Branch tag of a transition that has a single output branch.
inline constexpr int kOnlyBranch = -1;

using Value = std::variant<std::int64_t, bool, std::string>;

class Token {
 public:
  using Attributes = std::map<std::string, Value, std::less<>>;

  Token() = default;
  explicit Token(Attributes attributes) : attributes_(std::move(attributes)) {}

  void set(std::string_view name, Value value);
  bool has(std::string_view name) const;
  const Value& get(std::string_view name) const;
  std::int64_t get_int(std::string_view name) const;
  bool get_bool(std::string_view name) const;
  const std::string& get_string(std::string_view name) const;

  const Attributes& attributes() const { return attributes_; }

  friend bool operator==(const Token&, const Token&) = default;

 private:
  Attributes attributes_;
};

// `{name=value,...}` in attribute-name order.
std::string format_attributes(const Token& token);

struct OutputBranch {
  int branch = kOnlyBranch;
  // nullopt means the token is absorbed.
  std::optional<std::string> position;

  friend bool operator==(const OutputBranch&, const OutputBranch&) = default;
};

struct TransitionDef {
  std::string id;
  std::vector<std::string> inputs;
  std::vector<OutputBranch> outputs;
  std::optional<std::string> resolver;
  std::string procedure;

  friend bool operator==(const TransitionDef&, const TransitionDef&) = default;
};

struct NetDefinition {
  std::string name;
  std::vector<std::string> positions;
  std::vector<std::string> peripheral;
  std::vector<std::string> resolving;
  std::vector<TransitionDef> transitions;
  // Positions holding a token in the initial marking Mo.
  std::vector<std::string> initial;

  friend bool operator==(const NetDefinition&, const NetDefinition&) = default;
};

struct Issue {
  Errc code;
  std::string detail;
};

// Thrown by build_net; carries every structural problem found.
class NetDefinitionError : public Error {
 public:
  explicit NetDefinitionError(std::vector<Issue> issues);
  const std::vector<Issue>& issues() const { return issues_; }

 private:
  std::vector<Issue> issues_;
};

using Procedure = std::function<void(Token&)>;
using ProcedureTable = std::map<std::string, Procedure, std::less<>>;

class Marking {
 public:
  using Occupancy = std::map<std::string, Token, std::less<>>;

  Marking() = default;
  explicit Marking(Occupancy occupancy) : occupancy_(std::move(occupancy)) {}

  bool occupied(std::string_view position) const;
  const Token& token_at(std::string_view position) const;
  std::size_t token_count() const { return occupancy_.size(); }
  bool empty() const { return occupancy_.empty(); }
  std::set<std::string> places() const;

  const Occupancy& occupancy() const { return occupancy_; }

  // Throws Error(kUnsafeInitial) if the position already holds a token.
  void put(const std::string& position, Token token);
  Token take(std::string_view position);

  friend bool operator==(const Marking&, const Marking&) = default;

 private:
  Occupancy occupancy_;
};

// A validated, immutable net. Create with build_net.
class Net {
 public:
  const NetDefinition& definition() const { return definition_; }
  const TransitionDef& transition(std::string_view id) const;
  bool is_resolving(std::string_view id) const;

  // F: 1 iff `position` is an input of `transition`.
  int input_arc(std::string_view position, std::string_view transition) const;
  // H: 1 iff some output branch of `transition` targets `position`.
  int output_arc(std::string_view transition, std::string_view position) const;

  // Mo with a copy of `seed` in every initially marked position.
  Marking initial_marking(const Token& seed = {}) const;

  void apply_procedure(const TransitionDef& t, Token& token) const;

 private:
  friend Net build_net(NetDefinition definition, ProcedureTable procedures);
  Net(NetDefinition definition, ProcedureTable procedures);

  NetDefinition definition_;
  ProcedureTable procedures_;
  std::map<std::string, std::size_t, std::less<>> transition_index_;
};

// Validates the definition. Procedures missing from the table act as the
// identity transform.
Net build_net(NetDefinition definition, ProcedureTable procedures = {});

struct Firing {
  std::string transition;
  int branch = kOnlyBranch;

  friend bool operator==(const Firing&, const Firing&) = default;
  friend auto operator<=>(const Firing&, const Firing&) = default;
};

std::string to_string(const Firing& firing);

// Answers which branch a resolving position selects for the token produced
// by the transition's procedure. nullopt leaves the branch unconstrained.
using Resolver =
    std::function<std::optional<int>(std::string_view resolving, const Token& token)>;
using Resolutions = std::map<std::string, int, std::less<>>;

Resolver resolver_from(Resolutions resolutions);

std::vector<Firing> enabled(const Net& net, const Marking& marking, const Resolver& resolver);
std::vector<Firing> enabled(const Net& net, const Marking& marking,
                            const Resolutions& resolutions = {});

struct FiringRecord {
  std::size_t step = 0;
  std::string transition;
  int branch = kOnlyBranch;
  Token before;
  Token after;

  friend bool operator==(const FiringRecord&, const FiringRecord&) = default;
};

// `step transition branch {attr=val,...}`; single-branch transitions print
// `-` as their branch.
std::string format_record(const FiringRecord& record);

// Throws Error(kNotEnabled) unless every input is occupied, the branch
// exists, and its output position is free once the inputs are consumed.
std::pair<Marking, FiringRecord> fire(const Net& net, const Marking& marking,
                                      std::string_view transition, int branch,
                                      std::size_t step = 1);

struct RunResult {
  std::vector<FiringRecord> trace;
  Marking final_marking;
};

// Fires the unique enabled pair until none is enabled or max_steps firings
// happened. Two simultaneous candidates throw Error(kNondeterminism).
RunResult run(const Net& net, const Marking& start, const Resolver& resolver,
              std::size_t max_steps);

using PlaceSet = std::set<std::string>;

inline constexpr std::size_t kDefaultStateCap = 1'000'000;

// Breadth-first closure over token placement from Mo, exploring both
// branches of every switched transition. Token attributes are ignored.
std::set<PlaceSet> reachable_markings(const Net& net, std::size_t cap = kDefaultStateCap);

}  // namespace vpvn::enet
