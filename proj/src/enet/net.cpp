#include "vpvn/enet/net.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace vpvn::enet {

void Token::set(std::string_view name, Value value) {
  auto it = attributes_.find(name);
  if (it == attributes_.end()) {
    attributes_.emplace(std::string(name), std::move(value));
  } else {
    it->second = std::move(value);
  }
}

bool Token::has(std::string_view name) const { return attributes_.contains(name); }

const Value& Token::get(std::string_view name) const {
  auto it = attributes_.find(name);
  if (it == attributes_.end()) {
    throw Error(Errc::kMalformed, "token has no attribute " + std::string(name));
  }
  return it->second;
}

std::int64_t Token::get_int(std::string_view name) const {
  const Value& v = get(name);
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  throw Error(Errc::kMalformed, "attribute " + std::string(name) + " is not an integer");
}

bool Token::get_bool(std::string_view name) const {
  const Value& v = get(name);
  if (const auto* b = std::get_if<bool>(&v)) return *b;
  throw Error(Errc::kMalformed, "attribute " + std::string(name) + " is not a flag");
}

const std::string& Token::get_string(std::string_view name) const {
  const Value& v = get(name);
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  throw Error(Errc::kMalformed, "attribute " + std::string(name) + " is not an id");
}

std::string format_attributes(const Token& token) {
  std::ostringstream out;
  out << '{';
  bool first = true;
  for (const auto& [name, value] : token.attributes()) {
    if (!first) out << ',';
    first = false;
    out << name << '=';
    std::visit(
        [&out](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, bool>) {
            out << (v ? "true" : "false");
          } else {
            out << v;
          }
        },
        value);
  }
  out << '}';
  return out.str();
}

namespace {

std::string describe(const std::vector<Issue>& issues) {
  std::string out;
  for (const Issue& issue : issues) {
    if (!out.empty()) out += "; ";
    out += std::string(to_string(issue.code)) + " " + issue.detail;
  }
  return out;
}

const OutputBranch* find_branch(const TransitionDef& t, int branch) {
  for (const OutputBranch& out : t.outputs) {
    if (out.branch == branch) return &out;
  }
  return nullptr;
}

// Structural enablement: inputs occupied and the branch target free once
// the inputs have been consumed.
bool structurally_enabled(const TransitionDef& t, const OutputBranch& out,
                          const Marking& marking) {
  for (const std::string& in : t.inputs) {
    if (!marking.occupied(in)) return false;
  }
  if (!out.position) return true;
  bool consumed = std::find(t.inputs.begin(), t.inputs.end(), *out.position) != t.inputs.end();
  return consumed || !marking.occupied(*out.position);
}

}  // namespace

NetDefinitionError::NetDefinitionError(std::vector<Issue> issues)
    : Error(issues.empty() ? Errc::kMalformed : issues.front().code, describe(issues)),
      issues_(std::move(issues)) {}

bool Marking::occupied(std::string_view position) const {
  return occupancy_.contains(position);
}

const Token& Marking::token_at(std::string_view position) const {
  auto it = occupancy_.find(position);
  if (it == occupancy_.end()) {
    throw Error(Errc::kNotEnabled, "position " + std::string(position) + " is empty");
  }
  return it->second;
}

std::set<std::string> Marking::places() const {
  std::set<std::string> out;
  for (const auto& [position, token] : occupancy_) out.insert(position);
  return out;
}

void Marking::put(const std::string& position, Token token) {
  auto [it, inserted] = occupancy_.emplace(position, std::move(token));
  if (!inserted) {
    throw Error(Errc::kUnsafeInitial, "second token in position " + position);
  }
}

Token Marking::take(std::string_view position) {
  auto it = occupancy_.find(position);
  if (it == occupancy_.end()) {
    throw Error(Errc::kNotEnabled, "position " + std::string(position) + " is empty");
  }
  Token token = std::move(it->second);
  occupancy_.erase(it);
  return token;
}

Net::Net(NetDefinition definition, ProcedureTable procedures)
    : definition_(std::move(definition)), procedures_(std::move(procedures)) {
  for (std::size_t i = 0; i < definition_.transitions.size(); ++i) {
    transition_index_.emplace(definition_.transitions[i].id, i);
  }
}

const TransitionDef& Net::transition(std::string_view id) const {
  auto it = transition_index_.find(id);
  if (it == transition_index_.end()) {
    throw Error(Errc::kNotEnabled, "unknown transition " + std::string(id));
  }
  return definition_.transitions[it->second];
}

bool Net::is_resolving(std::string_view id) const {
  const auto& r = definition_.resolving;
  return std::find(r.begin(), r.end(), id) != r.end();
}

int Net::input_arc(std::string_view position, std::string_view transition) const {
  auto it = transition_index_.find(transition);
  if (it == transition_index_.end()) return 0;
  const auto& inputs = definition_.transitions[it->second].inputs;
  return std::find(inputs.begin(), inputs.end(), position) != inputs.end() ? 1 : 0;
}

int Net::output_arc(std::string_view transition, std::string_view position) const {
  auto it = transition_index_.find(transition);
  if (it == transition_index_.end()) return 0;
  for (const OutputBranch& out : definition_.transitions[it->second].outputs) {
    if (out.position && *out.position == position) return 1;
  }
  return 0;
}

Marking Net::initial_marking(const Token& seed) const {
  Marking m;
  for (const std::string& p : definition_.initial) m.put(p, seed);
  return m;
}

void Net::apply_procedure(const TransitionDef& t, Token& token) const {
  auto it = procedures_.find(t.procedure);
  if (it != procedures_.end() && it->second) it->second(token);
}

Net build_net(NetDefinition def, ProcedureTable procedures) {
  std::vector<Issue> issues;
  auto add = [&issues](Errc code, std::string detail) {
    issues.push_back({code, std::move(detail)});
  };

  std::set<std::string> ids;
  auto claim = [&](const std::string& id) {
    if (!ids.insert(id).second) add(Errc::kDuplicateId, "id " + id + " declared twice");
  };
  for (const auto& p : def.positions) claim(p);
  for (const auto& r : def.resolving) claim(r);
  for (const auto& t : def.transitions) claim(t.id);

  std::set<std::string> positions(def.positions.begin(), def.positions.end());
  std::set<std::string> resolving(def.resolving.begin(), def.resolving.end());
  auto is_position = [&](const std::string& p) { return positions.contains(p); };

  std::set<std::string> peripheral;
  for (const auto& p : def.peripheral) {
    if (!is_position(p)) add(Errc::kDanglingArc, "peripheral " + p + " is not a position");
    if (!peripheral.insert(p).second) add(Errc::kDuplicateId, "peripheral " + p + " listed twice");
  }

  for (const TransitionDef& t : def.transitions) {
    if (t.inputs.empty()) add(Errc::kBadBranching, t.id + " has no input position");
    std::set<std::string> seen;
    for (const auto& in : t.inputs) {
      if (!is_position(in)) add(Errc::kDanglingArc, t.id + " reads unknown position " + in);
      if (!seen.insert(in).second) add(Errc::kDuplicateId, t.id + " reads " + in + " twice");
    }
    for (const OutputBranch& out : t.outputs) {
      if (out.position && !is_position(*out.position)) {
        add(Errc::kDanglingArc, t.id + " writes unknown position " + *out.position);
      }
    }
    if (t.resolver && !resolving.contains(*t.resolver)) {
      add(Errc::kDanglingArc, t.id + " names unknown resolver " + *t.resolver);
    }
    switch (t.outputs.size()) {
      case 1:
        if (t.resolver) add(Errc::kBadBranching, t.id + " has one branch but a resolver");
        if (t.outputs[0].branch != kOnlyBranch) {
          add(Errc::kBadBranching, t.id + " single branch must not carry a tag");
        }
        break;
      case 2: {
        if (!t.resolver) add(Errc::kBadBranching, t.id + " has two branches and no resolver");
        std::set<int> tags{t.outputs[0].branch, t.outputs[1].branch};
        if (tags != std::set<int>{0, 1}) {
          add(Errc::kBadBranching, t.id + " switched branches must be tagged 0 and 1");
        }
        break;
      }
      default:
        add(Errc::kBadBranching, t.id + " must have one or two output branches");
    }
  }

  std::set<std::string> marked;
  for (const auto& p : def.initial) {
    if (!is_position(p)) {
      add(Errc::kDanglingArc, "initial marking names unknown position " + p);
    } else if (!marked.insert(p).second) {
      add(Errc::kUnsafeInitial, "initial marking puts two tokens in " + p);
    }
  }

  if (!issues.empty()) throw NetDefinitionError(std::move(issues));
  return Net(std::move(def), std::move(procedures));
}

std::string to_string(const Firing& firing) {
  if (firing.branch == kOnlyBranch) return firing.transition;
  return firing.transition + "/" + std::to_string(firing.branch);
}

Resolver resolver_from(Resolutions resolutions) {
  return [resolutions = std::move(resolutions)](std::string_view id,
                                                 const Token&) -> std::optional<int> {
    auto it = resolutions.find(id);
    if (it == resolutions.end()) return std::nullopt;
    return it->second;
  };
}

namespace {

template <typename Chooser>
std::vector<Firing> enabled_impl(const Net& net, const Marking& marking, Chooser&& choose) {
  std::vector<Firing> out;
  for (const TransitionDef& t : net.definition().transitions) {
    bool inputs_ready = std::all_of(t.inputs.begin(), t.inputs.end(),
                                    [&](const std::string& p) { return marking.occupied(p); });
    if (!inputs_ready) continue;
    std::optional<int> selected;
    if (t.resolver) selected = choose(t);
    for (const OutputBranch& branch : t.outputs) {
      if (selected && branch.branch != *selected) continue;
      if (structurally_enabled(t, branch, marking)) out.push_back({t.id, branch.branch});
    }
  }
  return out;
}

}  // namespace

std::vector<Firing> enabled(const Net& net, const Marking& marking, const Resolver& resolver) {
  return enabled_impl(net, marking, [&](const TransitionDef& t) -> std::optional<int> {
    if (!resolver) return std::nullopt;
    Token token = marking.token_at(t.inputs.front());
    net.apply_procedure(t, token);
    return resolver(*t.resolver, token);
  });
}

std::vector<Firing> enabled(const Net& net, const Marking& marking,
                            const Resolutions& resolutions) {
  return enabled_impl(net, marking, [&](const TransitionDef& t) -> std::optional<int> {
    auto it = resolutions.find(*t.resolver);
    if (it == resolutions.end()) return std::nullopt;
    return it->second;
  });
}

std::string format_record(const FiringRecord& record) {
  std::ostringstream out;
  out << record.step << ' ' << record.transition << ' ';
  if (record.branch == kOnlyBranch) {
    out << '-';
  } else {
    out << record.branch;
  }
  out << ' ' << format_attributes(record.after);
  return out.str();
}

std::pair<Marking, FiringRecord> fire(const Net& net, const Marking& marking,
                                      std::string_view transition, int branch,
                                      std::size_t step) {
  const TransitionDef& t = net.transition(transition);
  const OutputBranch* out = find_branch(t, branch);
  if (out == nullptr) {
    throw Error(Errc::kNotEnabled, t.id + " has no branch " + std::to_string(branch));
  }
  if (!structurally_enabled(t, *out, marking)) {
    throw Error(Errc::kNotEnabled, to_string(Firing{t.id, branch}) + " is not enabled");
  }

  Marking next = marking;
  Token token = next.take(t.inputs.front());
  for (std::size_t i = 1; i < t.inputs.size(); ++i) next.take(t.inputs[i]);

  FiringRecord record{step, t.id, branch, token, {}};
  net.apply_procedure(t, token);
  record.after = token;
  if (out->position) next.put(*out->position, std::move(token));
  return {std::move(next), std::move(record)};
}

RunResult run(const Net& net, const Marking& start, const Resolver& resolver,
              std::size_t max_steps) {
  RunResult result{{}, start};
  for (std::size_t step = 1; step <= max_steps; ++step) {
    std::vector<Firing> candidates = enabled(net, result.final_marking, resolver);
    if (candidates.empty()) break;
    if (candidates.size() > 1) {
      std::string detail;
      for (const Firing& f : candidates) detail += " " + to_string(f);
      throw Error(Errc::kNondeterminism, "simultaneously enabled:" + detail);
    }
    auto [next, record] =
        fire(net, result.final_marking, candidates.front().transition,
             candidates.front().branch, step);
    result.final_marking = std::move(next);
    result.trace.push_back(std::move(record));
  }
  return result;
}

std::set<PlaceSet> reachable_markings(const Net& net, std::size_t cap) {
  // Placement only; tokens are blank so no procedure ever runs.
  auto to_marking = [](const PlaceSet& places) {
    Marking m;
    for (const std::string& p : places) m.put(p, Token{});
    return m;
  };
  const auto& initial = net.definition().initial;
  PlaceSet start(initial.begin(), initial.end());
  std::set<PlaceSet> seen{start};
  std::deque<PlaceSet> frontier{start};
  while (!frontier.empty()) {
    PlaceSet current = std::move(frontier.front());
    frontier.pop_front();
    Marking marking = to_marking(current);
    for (const Firing& f : enabled(net, marking, Resolutions{})) {
      const TransitionDef& t = net.transition(f.transition);
      PlaceSet next = current;
      for (const std::string& in : t.inputs) next.erase(in);
      const OutputBranch* out = find_branch(t, f.branch);
      if (out->position) next.insert(*out->position);
      if (seen.insert(next).second) {
        if (seen.size() > cap) {
          throw Error(Errc::kStateExplosion,
                      "more than " + std::to_string(cap) + " reachable markings");
        }
        frontier.push_back(std::move(next));
      }
    }
  }
  return seen;
}

}  // namespace vpvn::enet
