#include "vpvn/model/envpvn.hpp"

#include <stdexcept>

namespace vpvn::model {

namespace {

std::string s(std::string_view v) { return std::string(v); }

enet::TransitionDef simple(std::string_view id, std::string_view procedure,
                           std::string_view from, std::optional<std::string> to) {
  return {s(id), {s(from)}, {{enet::kOnlyBranch, std::move(to)}}, std::nullopt, s(procedure)};
}

enet::TransitionDef switched(std::string_view id, std::string_view procedure,
                             std::string_view from, std::string_view resolver,
                             std::optional<std::string> on_one,
                             std::optional<std::string> on_zero) {
  return {s(id),
          {s(from)},
          {{1, std::move(on_one)}, {0, std::move(on_zero)}},
          s(resolver),
          s(procedure)};
}

bool bit(std::int64_t mask, std::int64_t index) {
  return index >= 0 && index < 63 && ((mask >> index) & 1) != 0;
}

template <typename F>
enet::Procedure on_session(F f) {
  return [f = std::move(f)](enet::Token& token) {
    SessionToken session = from_token(token);
    f(session);
    token = to_token(session);
  };
}

}  // namespace

enet::NetDefinition en_vpvn() {
  enet::NetDefinition def;
  def.name = "envpvn";
  def.positions.push_back(s(ids::kBp1));
  for (auto b : ids::kInternal) def.positions.push_back(s(b));
  def.peripheral = {s(ids::kBp1)};
  for (auto r : ids::kResolving) def.resolving.push_back(s(r));
  def.initial = {s(ids::kBp1)};
  def.transitions = {
      simple("t1", "Ident", "bp1", "b1"),
      switched("t2", "CheckAuthorities", "b1", "br1", "b2", "b3"),
      simple("t3", "GenSKey", "b2", "b4"),
      simple("t4", "EndInit", "b3", std::nullopt),
      simple("t5", "ECCSKey", "b4", "b5"),
      simple("t6", "SendSKey", "b5", "b6"),
      switched("t7", "Encrypt", "b6", "br2", "bp1", "b7"),
      simple("t8", "Send", "b7", "b8"),
      simple("t9", "Receive", "b8", "b9"),
      simple("t10", "Decrypt", "b9", "b10"),
      switched("t11", "CheckSKey", "b10", "br3", "bp1", "b11"),
      switched("t12", "Quit", "b11", "br4", std::nullopt, "b6"),
  };
  return def;
}

enet::Token to_token(const SessionToken& t) {
  return enet::Token({
      {"requester", t.requester},
      {"peer", t.peer},
      {"authorized", t.authorized},
      {"session", t.session},
      {"rekey_needed", t.rekey_needed},
      {"end_of_work", t.end_of_work},
      {"frames_remaining", t.frames_remaining},
      {"frames_sent", t.frames_sent},
      {"generation", t.generation},
      {"packets_since_key", t.packets_since_key},
      {"key_budget", t.key_budget},
      {"forced_pre_rekeys", t.forced_pre_rekeys},
      {"forced_pre_done", t.forced_pre_done},
      {"forced_post_rekeys", t.forced_post_rekeys},
  });
}

SessionToken from_token(const enet::Token& token) {
  SessionToken t;
  t.requester = token.get_string("requester");
  t.peer = token.get_string("peer");
  t.authorized = token.get_bool("authorized");
  t.session = token.get_string("session");
  t.rekey_needed = token.get_bool("rekey_needed");
  t.end_of_work = token.get_bool("end_of_work");
  t.frames_remaining = token.get_int("frames_remaining");
  t.frames_sent = token.get_int("frames_sent");
  t.generation = token.get_int("generation");
  t.packets_since_key = token.get_int("packets_since_key");
  t.key_budget = token.get_int("key_budget");
  t.forced_pre_rekeys = token.get_int("forced_pre_rekeys");
  t.forced_pre_done = token.get_int("forced_pre_done");
  t.forced_post_rekeys = token.get_int("forced_post_rekeys");
  return t;
}

enet::ProcedureTable vpvn_procedures(ModelEnvironment environment) {
  auto authorize = environment.authorize;
  enet::ProcedureTable table;
  table["Ident"] = on_session([](SessionToken& t) { t.authorized = false; });
  table["CheckAuthorities"] = on_session([authorize](SessionToken& t) {
    t.authorized = authorize ? authorize(t.requester, t.peer) : true;
  });
  table["GenSKey"] = on_session([](SessionToken& t) {
    ++t.generation;
    t.packets_since_key = 0;
    t.rekey_needed = false;
  });
  table["EndInit"] = on_session([](SessionToken& t) { t.end_of_work = true; });
  table["ECCSKey"] = nullptr;
  table["SendSKey"] = nullptr;
  table["Encrypt"] = on_session([](SessionToken& t) {
    bool forced = bit(t.forced_pre_rekeys, t.frames_sent) && !bit(t.forced_pre_done, t.frames_sent);
    bool exhausted = t.key_budget > 0 && t.packets_since_key >= t.key_budget;
    t.rekey_needed = forced || exhausted;
    if (forced) t.forced_pre_done |= std::int64_t{1} << t.frames_sent;
    if (!t.rekey_needed) {
      ++t.packets_since_key;
      ++t.frames_sent;
      --t.frames_remaining;
    }
  });
  table["Send"] = nullptr;
  table["Receive"] = nullptr;
  table["Decrypt"] = nullptr;
  table["CheckSKey"] = on_session([](SessionToken& t) {
    t.rekey_needed = bit(t.forced_post_rekeys, t.frames_sent - 1) && t.frames_remaining > 0;
  });
  table["Quit"] = on_session([](SessionToken& t) {
    if (t.frames_remaining == 0) t.end_of_work = true;
  });
  return table;
}

enet::Net vpvn_net(ModelEnvironment environment) {
  return enet::build_net(en_vpvn(), vpvn_procedures(std::move(environment)));
}

int resolve(std::string_view resolving, const SessionToken& token) {
  if (resolving == "br1") return token.authorized ? 1 : 0;
  if (resolving == "br2" || resolving == "br3") return token.rekey_needed ? 1 : 0;
  if (resolving == "br4") return (token.end_of_work || token.frames_remaining == 0) ? 1 : 0;
  throw Error(Errc::kUnknownResolver, std::string(resolving));
}

enet::Resolver vpvn_resolver() {
  return [](std::string_view resolving, const enet::Token& token) -> std::optional<int> {
    return resolve(resolving, from_token(token));
  };
}

std::size_t happy_path_length(std::size_t frames, std::size_t rekeys) {
  if (frames < 1) throw std::invalid_argument("happy_path_length needs at least one frame");
  return path_length(frames, rekeys, 0);
}

std::size_t path_length(std::size_t frames, std::size_t pre_encrypt_rekeys,
                        std::size_t post_decrypt_rekeys) {
  if (frames < 1) throw std::invalid_argument("path_length needs at least one frame");
  return 5 + 6 * frames + 6 * pre_encrypt_rekeys + 4 * post_decrypt_rekeys;
}

}  // namespace vpvn::model
