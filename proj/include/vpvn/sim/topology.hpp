#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "vpvn/crypto/aead.hpp"
#include "vpvn/media/layer.hpp"
#include "vpvn/media/packet.hpp"

namespace vpvn::sim {

enum class NodeRole : std::uint8_t { kPoint, kGateway, kKdc, kInnerUser };

std::string_view to_string(NodeRole role);

struct NodeSpec {
  std::string id;
  NodeRole role = NodeRole::kPoint;
  // Gateways: users on the cleartext side.
  std::vector<std::string> inner_users;
  // Inner users: the gateway they sit behind.
  std::string gateway;
};

struct LinkSpec {
  std::string a;
  std::string b;
  std::uint64_t latency = 1;
  double loss = 0.0;
  // Extra delay drawn uniformly from [0, reorder] ticks per packet.
  std::uint64_t reorder = 0;
};

struct AclEntry {
  std::string subscriber;
  // "*" grants every peer.
  std::vector<std::string> peers;
};

struct Topology {
  std::vector<NodeSpec> nodes;
  std::vector<LinkSpec> links;
  std::vector<AclEntry> acl;
  std::uint64_t seed = 1;
  crypto::CipherSuite cipher = crypto::CipherSuite::kAes256Gcm;

  const NodeSpec* find(std::string_view id) const;
  const NodeSpec& kdc() const;
  const LinkSpec* link(std::string_view a, std::string_view b) const;
  // Gateway for an inner user, the node itself for points and gateways.
  const NodeSpec& subscriber_of(std::string_view id) const;
};

enum class Pacing : std::uint8_t { kStopAndWait, kBurst };
enum class FlowDirection : std::uint8_t { kForward, kReverse, kAlternate };

struct SessionSpec {
  std::string name;
  std::string initiator;
  std::string responder;
  // Intermediate gateways; each hop is its own KDC session.
  std::vector<std::string> via;
  std::size_t frames = 1;
  std::size_t frame_size = 160;
  media::PacketType type = media::PacketType::kVideo;
  std::uint8_t priority = 0;
  std::uint8_t qos = 0;
  FlowDirection direction = FlowDirection::kForward;
  Pacing pacing = Pacing::kStopAndWait;
  // 1-based frame numbers.
  std::vector<std::size_t> rekey_before_frames;
  std::vector<std::size_t> rekey_after_frames;
  std::optional<media::RekeyPolicy> rekey_policy;
  std::size_t replay_window = 0;
};

struct Scenario {
  Topology topology;
  media::RekeyPolicy rekey_policy;
  std::vector<SessionSpec> sessions;
};

// Completes and validates a topology: adds inner users as nodes, adds a
// default inner link for every inner user without one, checks ids, links,
// ACL, KDC count and connectivity.
// Errors: kSchemaError, kNoKdc, kDisconnected.
Topology build_topology(Topology config);

// JSON scenario file; see docs/scenario_format.md.
// Errors: kSchemaError plus everything build_topology throws.
Scenario parse_scenario(std::string_view json_text);
Topology parse_topology(std::string_view json_text);

}  // namespace vpvn::sim
