#pragma once

#include <string>
#include <string_view>

#include "vpvn/enet/net.hpp"

namespace vpvn::enet {

// Line-oriented net definition text. `#` starts a comment.
//
//   net <name>
//   positions <id> <id> ...
//   peripheral <id> ...
//   resolving <id> ...
//   initial <id> ...
//   transition <id> <procedure> in <id>[,<id>...] out <id|ABSORB>
//   transition <id> <procedure> in <id>[,<id>...] switch <resolver> <tag>:<id|ABSORB> <tag>:<id|ABSORB>
//
// Syntax errors throw Error(kMalformed). Structure is checked later by
// build_net.
NetDefinition parse_net_text(std::string_view text);

std::string format_net_text(const NetDefinition& definition);

}  // namespace vpvn::enet
