#include "vpvn/sim/topology.hpp"

#include <map>
#include <set>

#include "vpvn/error.hpp"

namespace vpvn::sim {

namespace {

[[noreturn]] void schema(const std::string& what) { throw Error(Errc::kSchemaError, what); }

}  // namespace

std::string_view to_string(NodeRole role) {
  switch (role) {
    case NodeRole::kPoint: return "point";
    case NodeRole::kGateway: return "gateway";
    case NodeRole::kKdc: return "kdc";
    case NodeRole::kInnerUser: return "inner";
  }
  return "unknown";
}

const NodeSpec* Topology::find(std::string_view id) const {
  for (const NodeSpec& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

const NodeSpec& Topology::kdc() const {
  for (const NodeSpec& n : nodes) {
    if (n.role == NodeRole::kKdc) return n;
  }
  throw Error(Errc::kNoKdc, "topology has no kdc node");
}

const LinkSpec* Topology::link(std::string_view a, std::string_view b) const {
  for (const LinkSpec& l : links) {
    if ((l.a == a && l.b == b) || (l.a == b && l.b == a)) return &l;
  }
  return nullptr;
}

const NodeSpec& Topology::subscriber_of(std::string_view id) const {
  const NodeSpec* n = find(id);
  if (n == nullptr) schema("unknown node " + std::string(id));
  if (n->role == NodeRole::kInnerUser) return subscriber_of(n->gateway);
  if (n->role == NodeRole::kKdc) schema("the kdc is not a subscriber");
  return *n;
}

Topology build_topology(Topology t) {
  std::set<std::string> ids;
  std::size_t kdc_count = 0;
  std::vector<NodeSpec> inner;
  std::map<std::string, std::string> owner;
  for (const NodeSpec& n : t.nodes) {
    if (n.id.empty() || n.id.find_first_of(" \t\n") != std::string::npos) {
      schema("node ids must be non-empty and contain no whitespace");
    }
    if (!ids.insert(n.id).second) schema("duplicate node id " + n.id);
    if (n.role == NodeRole::kKdc) ++kdc_count;
    if (n.role != NodeRole::kGateway && !n.inner_users.empty()) {
      schema(n.id + ": only gateways have inner users");
    }
    if (n.role == NodeRole::kInnerUser && (n.gateway.empty() || !n.inner_users.empty())) {
      schema(n.id + ": declare inner users through their gateway");
    }
    for (const std::string& u : n.inner_users) {
      auto [it, fresh] = owner.emplace(u, n.id);
      if (!fresh) schema("inner user " + u + " attached to both " + it->second + " and " + n.id);
      inner.push_back({u, NodeRole::kInnerUser, {}, n.id});
    }
  }
  for (const NodeSpec& n : t.nodes) {
    if (n.role == NodeRole::kInnerUser) schema(n.id + ": declare inner users through their gateway");
  }
  if (kdc_count == 0) throw Error(Errc::kNoKdc, "topology has no kdc node");
  if (kdc_count > 1) schema("exactly one kdc allowed, found " + std::to_string(kdc_count));
  for (NodeSpec& u : inner) {
    if (!ids.insert(u.id).second) schema("duplicate node id " + u.id);
    t.nodes.push_back(std::move(u));
  }

  std::set<std::pair<std::string, std::string>> seen_links;
  for (const LinkSpec& l : t.links) {
    if (!t.find(l.a) || !t.find(l.b)) schema("link " + l.a + "-" + l.b + " names an unknown node");
    if (l.a == l.b) schema("link " + l.a + " loops onto itself");
    if (!(l.loss >= 0.0 && l.loss <= 1.0)) schema("link " + l.a + "-" + l.b + " loss outside [0,1]");
    auto key = std::minmax(l.a, l.b);
    if (!seen_links.emplace(key.first, key.second).second) {
      schema("duplicate link " + l.a + "-" + l.b);
    }
    const NodeSpec* a = t.find(l.a);
    const NodeSpec* b = t.find(l.b);
    for (auto [x, y] : {std::pair{a, b}, std::pair{b, a}}) {
      if (x->role == NodeRole::kInnerUser && y->id != x->gateway) {
        schema("inner user " + x->id + " may only link to its gateway");
      }
    }
  }
  for (const NodeSpec& n : t.nodes) {
    if (n.role == NodeRole::kInnerUser && !t.link(n.id, n.gateway)) {
      t.links.push_back({n.gateway, n.id, 1, 0.0, 0});
    }
  }

  for (const AclEntry& e : t.acl) {
    const NodeSpec* s = t.find(e.subscriber);
    if (!s || (s->role != NodeRole::kPoint && s->role != NodeRole::kGateway)) {
      schema("acl entry for unknown subscriber " + e.subscriber);
    }
    for (const std::string& p : e.peers) {
      const NodeSpec* peer = t.find(p);
      if (p != "*" && (!peer || (peer->role != NodeRole::kPoint &&
                                 peer->role != NodeRole::kGateway))) {
        schema("acl of " + e.subscriber + " names unknown subscriber " + p);
      }
    }
  }

  // Every node must reach the kdc.
  std::map<std::string, std::vector<std::string>> adjacent;
  for (const LinkSpec& l : t.links) {
    adjacent[l.a].push_back(l.b);
    adjacent[l.b].push_back(l.a);
  }
  std::set<std::string> reached{t.kdc().id};
  std::vector<std::string> stack{t.kdc().id};
  while (!stack.empty()) {
    std::string cur = stack.back();
    stack.pop_back();
    for (const std::string& next : adjacent[cur]) {
      if (reached.insert(next).second) stack.push_back(next);
    }
  }
  for (const NodeSpec& n : t.nodes) {
    if (!reached.contains(n.id)) {
      throw Error(Errc::kDisconnected, n.id + " cannot reach the kdc");
    }
  }
  return t;
}

}  // namespace vpvn::sim
