#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "vpvn/enet/net.hpp"
#include "vpvn/model/events.hpp"

namespace vpvn::model {

// The (transition, branch) a single event stands for.
enet::Firing event_firing(EventKind kind);

// Maps each event through event_firing. Consecutive KeyWrapped events of the
// dual wrap collapse into one t5 firing.
std::vector<enet::Firing> project_events(const EventLog& log);

enum class CheckMode {
  kComplete,  // the token must end absorbed
  kPrefix,    // any reachable marking is acceptable at the end
};

struct Verdict {
  bool accepted = true;
  // 1-based firing index of the violation. For a complete-mode log that
  // stops early it is one past the last firing.
  std::size_t step = 0;
  std::vector<enet::Firing> expected;
  std::optional<enet::Firing> offending;
  // Index into the log of the event behind the offending firing.
  std::optional<std::size_t> event_index;
};

std::string describe(const Verdict& verdict);

// Replays the projected firings on EN_VPVN from {bp1}. Each switched
// firing is resolved by the branch the event claims. Throws
// Error(kMalformed) when the log mixes session ids.
Verdict conformance_check(const EventLog& log, CheckMode mode = CheckMode::kComplete);

}  // namespace vpvn::model
