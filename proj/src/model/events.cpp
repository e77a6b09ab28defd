#include "vpvn/model/events.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <sstream>

#include "vpvn/error.hpp"

namespace vpvn::model {

namespace {

constexpr std::array<std::string_view, kEventKindCount> kNames = {
    "SessionRequested",   "AuthDecided(ok)", "AuthDecided(fail)", "KeyGenerated",
    "RequestRejected",    "KeyWrapped",      "KeyDelivered",      "RekeyBeforeEncrypt",
    "FrameEncrypted",     "FrameSent",       "FrameReceived",     "FrameDecrypted",
    "RekeyAfterDecrypt",  "KeyStillValid",   "SessionContinue",   "SessionEnd",
};

template <typename T>
bool parse_number(std::string_view text, T& out, int base = 10) {
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out, base);
  return ec == std::errc() && ptr == text.data() + text.size();
}

}  // namespace

std::string_view to_string(EventKind kind) {
  auto index = static_cast<std::size_t>(kind);
  if (index >= kNames.size()) {
    throw Error(Errc::kUnknownEventKind, "event kind " + std::to_string(index));
  }
  return kNames[index];
}

EventKind parse_event_kind(std::string_view text) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == text) return static_cast<EventKind>(i);
  }
  throw Error(Errc::kUnknownEventKind, std::string(text));
}

std::string format_session_id(std::uint64_t session) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(session));
  return buf;
}

std::string format_event(const ProtocolEvent& e) {
  return std::to_string(e.timestamp) + ' ' + e.node + ' ' + format_session_id(e.session) +
         ' ' + std::string(to_string(e.kind));
}

std::string format_log(const EventLog& log) {
  std::string out;
  for (const ProtocolEvent& e : log) out += format_event(e) + '\n';
  return out;
}

ProtocolEvent parse_event(std::string_view line) {
  std::istringstream in{std::string(line)};
  std::string ts, node, session, kind, extra;
  if (!(in >> ts >> node >> session >> kind) || (in >> extra)) {
    throw Error(Errc::kMalformed, "expected 'timestamp node session kind': " + std::string(line));
  }
  ProtocolEvent e;
  e.node = node;
  if (!parse_number(ts, e.timestamp)) throw Error(Errc::kMalformed, "bad timestamp " + ts);
  if (session.size() > 16 || !parse_number(session, e.session, 16)) {
    throw Error(Errc::kMalformed, "bad session id " + session);
  }
  e.kind = parse_event_kind(kind);
  return e;
}

EventLog parse_log(std::string_view text) {
  EventLog log;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    log.push_back(parse_event(line));
  }
  return log;
}

std::map<std::uint64_t, EventLog> split_by_session(const EventLog& log) {
  std::map<std::uint64_t, EventLog> out;
  for (const ProtocolEvent& e : log) out[e.session].push_back(e);
  return out;
}

}  // namespace vpvn::model
