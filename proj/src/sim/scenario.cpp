#include <algorithm>
#include <initializer_list>
#include <json.hpp>

#include "vpvn/error.hpp"
#include "vpvn/sim/topology.hpp"

namespace vpvn::sim {

namespace {

using nlohmann::json;

[[noreturn]] void schema(const std::string& what) { throw Error(Errc::kSchemaError, what); }

void only_keys(const json& obj, std::string_view where, std::initializer_list<std::string_view> keys) {
  if (!obj.is_object()) schema(std::string(where) + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      schema(std::string(where) + ": unknown field \"" + key + "\"");
    }
  }
}

const json& required(const json& obj, const char* key, std::string_view where) {
  auto it = obj.find(key);
  if (it == obj.end()) schema(std::string(where) + ": missing field \"" + key + "\"");
  return *it;
}

std::string text(const json& v, std::string_view what) {
  if (!v.is_string()) schema(std::string(what) + " must be a string");
  return v.get<std::string>();
}

std::uint64_t count(const json& v, std::string_view what) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    schema(std::string(what) + " must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::vector<std::string> strings(const json& v, std::string_view what) {
  if (!v.is_array()) schema(std::string(what) + " must be an array");
  std::vector<std::string> out;
  for (const json& e : v) out.push_back(text(e, what));
  return out;
}

std::vector<std::size_t> frame_numbers(const json& v, std::string_view what) {
  if (!v.is_array()) schema(std::string(what) + " must be an array");
  std::vector<std::size_t> out;
  for (const json& e : v) {
    std::uint64_t n = count(e, what);
    if (n == 0) schema(std::string(what) + " frame numbers start at 1");
    out.push_back(n);
  }
  return out;
}

media::RekeyPolicy policy(const json& v, media::RekeyPolicy base) {
  only_keys(v, "rekey_policy", {"max_packets", "max_bytes"});
  if (v.contains("max_packets")) base.max_packets = count(v["max_packets"], "max_packets");
  if (v.contains("max_bytes")) base.max_bytes = count(v["max_bytes"], "max_bytes");
  if (base.max_packets == 0 || base.max_bytes == 0) schema("rekey_policy limits must be positive");
  return base;
}

NodeRole role(const std::string& s) {
  if (s == "point") return NodeRole::kPoint;
  if (s == "gateway") return NodeRole::kGateway;
  if (s == "kdc") return NodeRole::kKdc;
  schema("unknown node role " + s);
}

Topology read_topology(const json& doc) {
  Topology t;
  if (doc.contains("seed")) t.seed = count(doc["seed"], "seed");
  if (doc.contains("cipher")) {
    try {
      t.cipher = crypto::parse_cipher_suite(text(doc["cipher"], "cipher"));
    } catch (const Error& e) {
      schema(e.what());
    }
  }
  const json& nodes = required(doc, "nodes", "scenario");
  if (!nodes.is_array()) schema("nodes must be an array");
  for (const json& n : nodes) {
    only_keys(n, "node", {"id", "role", "inner_users"});
    NodeSpec spec;
    spec.id = text(required(n, "id", "node"), "node id");
    spec.role = role(text(required(n, "role", "node"), "node role"));
    if (n.contains("inner_users")) spec.inner_users = strings(n["inner_users"], "inner_users");
    t.nodes.push_back(std::move(spec));
  }
  if (doc.contains("links")) {
    if (!doc["links"].is_array()) schema("links must be an array");
    for (const json& l : doc["links"]) {
      only_keys(l, "link", {"between", "latency", "loss", "reorder"});
      auto ends = strings(required(l, "between", "link"), "between");
      if (ends.size() != 2) schema("a link joins exactly two nodes");
      LinkSpec spec{ends[0], ends[1]};
      if (l.contains("latency")) spec.latency = count(l["latency"], "latency");
      if (l.contains("reorder")) spec.reorder = count(l["reorder"], "reorder");
      if (l.contains("loss")) {
        if (!l["loss"].is_number()) schema("loss must be a number");
        spec.loss = l["loss"].get<double>();
      }
      t.links.push_back(std::move(spec));
    }
  }
  if (doc.contains("acl")) {
    if (!doc["acl"].is_object()) schema("acl must map subscribers to peer lists");
    for (const auto& [who, peers] : doc["acl"].items()) {
      t.acl.push_back({who, strings(peers, "acl peers")});
    }
  }
  return build_topology(std::move(t));
}

media::PacketType packet_type(const std::string& s) {
  try {
    return media::parse_packet_type(s);
  } catch (const Error& e) {
    schema(e.what());
  }
}

SessionSpec read_session(const json& s, const Topology& t, const media::RekeyPolicy& base,
                         std::size_t index) {
  only_keys(s, "session",
            {"name", "initiator", "responder", "via", "frames", "frame_size", "type", "priority",
             "qos", "direction", "pacing", "rekey_before_frames", "rekey_after_frames",
             "rekey_policy", "replay_window"});
  SessionSpec spec;
  spec.name = s.contains("name") ? text(s["name"], "session name") : "s" + std::to_string(index + 1);
  spec.initiator = text(required(s, "initiator", "session"), "initiator");
  spec.responder = text(required(s, "responder", "session"), "responder");
  if (s.contains("via")) spec.via = strings(s["via"], "via");
  if (s.contains("frames")) spec.frames = count(s["frames"], "frames");
  if (s.contains("frame_size")) spec.frame_size = count(s["frame_size"], "frame_size");
  if (s.contains("type")) spec.type = packet_type(text(s["type"], "type"));
  if (s.contains("priority")) {
    std::uint64_t p = count(s["priority"], "priority");
    if (p > 7) schema("priority must be 0-7");
    spec.priority = static_cast<std::uint8_t>(p);
  }
  if (s.contains("qos")) {
    std::uint64_t q = count(s["qos"], "qos");
    if (q > 3) schema("qos must be 0-3");
    spec.qos = static_cast<std::uint8_t>(q);
  }
  if (s.contains("direction")) {
    std::string d = text(s["direction"], "direction");
    if (d == "forward") spec.direction = FlowDirection::kForward;
    else if (d == "reverse") spec.direction = FlowDirection::kReverse;
    else if (d == "alternate") spec.direction = FlowDirection::kAlternate;
    else schema("direction must be forward, reverse or alternate");
  }
  if (s.contains("pacing")) {
    std::string p = text(s["pacing"], "pacing");
    if (p == "stop_and_wait") spec.pacing = Pacing::kStopAndWait;
    else if (p == "burst") spec.pacing = Pacing::kBurst;
    else schema("pacing must be stop_and_wait or burst");
  }
  if (s.contains("rekey_before_frames")) {
    spec.rekey_before_frames = frame_numbers(s["rekey_before_frames"], "rekey_before_frames");
  }
  if (s.contains("rekey_after_frames")) {
    spec.rekey_after_frames = frame_numbers(s["rekey_after_frames"], "rekey_after_frames");
  }
  if (s.contains("rekey_policy")) spec.rekey_policy = policy(s["rekey_policy"], base);
  if (s.contains("replay_window")) {
    spec.replay_window = count(s["replay_window"], "replay_window");
    if (spec.replay_window > media::kMaxReplayWindow) schema("replay_window above 64");
  }

  auto check_end = [&](const std::string& id) {
    const NodeSpec* n = t.find(id);
    if (!n || n->role == NodeRole::kKdc) schema("session endpoint " + id + " is not a subscriber");
  };
  check_end(spec.initiator);
  check_end(spec.responder);
  if (!media::is_media(spec.type)) schema("session frames must be AUDIO or VIDEO");
  std::vector<std::string> chain{t.subscriber_of(spec.initiator).id};
  for (const std::string& g : spec.via) {
    const NodeSpec* n = t.find(g);
    if (!n || n->role != NodeRole::kGateway) schema("via entry " + g + " is not a gateway");
    chain.push_back(g);
  }
  chain.push_back(t.subscriber_of(spec.responder).id);
  for (std::size_t i = 1; i < chain.size(); ++i) {
    if (chain[i] == chain[i - 1]) schema("session " + spec.name + " has a hop from " + chain[i] + " to itself");
  }
  return spec;
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    schema(std::string("invalid json: ") + e.what());
  }
}

}  // namespace

Topology parse_topology(std::string_view json_text) {
  json doc = parse_json(json_text);
  only_keys(doc, "topology", {"seed", "cipher", "nodes", "links", "acl"});
  return read_topology(doc);
}

Scenario parse_scenario(std::string_view json_text) {
  json doc = parse_json(json_text);
  only_keys(doc, "scenario", {"seed", "cipher", "nodes", "links", "acl", "rekey_policy", "sessions"});
  Scenario sc;
  sc.topology = read_topology(doc);
  if (doc.contains("rekey_policy")) sc.rekey_policy = policy(doc["rekey_policy"], sc.rekey_policy);
  if (doc.contains("sessions")) {
    if (!doc["sessions"].is_array()) schema("sessions must be an array");
    std::set<std::string> names;
    for (std::size_t i = 0; i < doc["sessions"].size(); ++i) {
      SessionSpec s = read_session(doc["sessions"][i], sc.topology, sc.rekey_policy, i);
      if (!names.insert(s.name).second) schema("duplicate session name " + s.name);
      sc.sessions.push_back(std::move(s));
    }
  }
  return sc;
}

}  // namespace vpvn::sim
