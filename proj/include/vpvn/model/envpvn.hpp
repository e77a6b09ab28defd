#pragma once

// The concrete EN_VPVN net: five-subscriber VPVN with a KDC, as positions
// bp1, b1..b11, resolving positions br1..br4 and transitions t1..t12.

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

#include "vpvn/enet/net.hpp"

namespace vpvn::model {

namespace ids {
inline constexpr std::string_view kBp1 = "bp1";
inline constexpr std::array<std::string_view, 11> kInternal = {
    "b1", "b2", "b3", "b4", "b5", "b6", "b7", "b8", "b9", "b10", "b11"};
inline constexpr std::array<std::string_view, 4> kResolving = {"br1", "br2", "br3", "br4"};
inline constexpr std::array<std::string_view, 12> kTransitions = {
    "t1", "t2", "t3", "t4", "t5", "t6", "t7", "t8", "t9", "t10", "t11", "t12"};
inline constexpr std::array<std::string_view, 12> kPrimitives = {
    "Ident",   "CheckAuthorities", "GenSKey", "EndInit", "ECCSKey",   "SendSKey",
    "Encrypt", "Send",             "Receive", "Decrypt", "CheckSKey", "Quit"};
}  // namespace ids

// Branch tags of the switched transitions.
namespace branch {
inline constexpr int kAuthorized = 1;  // t2
inline constexpr int kRejected = 0;    // t2
inline constexpr int kRekey = 1;       // t7, t11
inline constexpr int kKeyValid = 0;    // t7, t11
inline constexpr int kEnd = 1;         // t12
inline constexpr int kContinue = 0;    // t12
}  // namespace branch

// Arc table:
//   t1  bp1 -> b1                      Ident
//   t2  b1  -> b2 (br1=1) | b3 (0)     CheckAuthorities
//   t3  b2  -> b4                      GenSKey
//   t4  b3  -> absorbed                EndInit
//   t5  b4  -> b5                      ECCSKey
//   t6  b5  -> b6                      SendSKey
//   t7  b6  -> bp1 (br2=1) | b7 (0)    Encrypt
//   t8  b7  -> b8                      Send
//   t9  b8  -> b9                      Receive
//   t10 b9  -> b10                     Decrypt
//   t11 b10 -> bp1 (br3=1) | b11 (0)   CheckSKey
//   t12 b11 -> absorbed (br4=1) | b6   Quit
// Rekey branches re-enter at bp1 so the whole key request t1,t2,t3,t5,t6 is
// replayed.
enet::NetDefinition en_vpvn();

// Session state carried by the single EN_VPVN token.
struct SessionToken {
  std::string requester;
  std::string peer;
  bool authorized = false;
  std::string session;
  bool rekey_needed = false;
  bool end_of_work = false;
  std::int64_t frames_remaining = 0;

  std::int64_t frames_sent = 0;
  std::int64_t generation = 0;
  std::int64_t packets_since_key = 0;
  // Packets allowed per key before the pre-encrypt check asks for a rekey;
  // 0 means unlimited.
  std::int64_t key_budget = 0;
  // Bit k forces a rekey before encrypting frame k (0-based).
  std::int64_t forced_pre_rekeys = 0;
  std::int64_t forced_pre_done = 0;
  // Bit k forces a rekey after decrypting frame k, if frames remain.
  std::int64_t forced_post_rekeys = 0;

  friend bool operator==(const SessionToken&, const SessionToken&) = default;
};

enet::Token to_token(const SessionToken& session);
SessionToken from_token(const enet::Token& token);

struct ModelEnvironment {
  // Consulted by CheckAuthorities. Empty means every pair is authorized.
  std::function<bool(const std::string& requester, const std::string& peer)> authorize;
};

enet::ProcedureTable vpvn_procedures(ModelEnvironment environment = {});

// build_net(en_vpvn(), vpvn_procedures(environment)).
enet::Net vpvn_net(ModelEnvironment environment = {});

// br1 -> authorized, br2/br3 -> rekey_needed, br4 -> end_of_work (also true
// once frames_remaining reaches 0). Throws Error(kUnknownResolver).
int resolve(std::string_view resolving, const SessionToken& token);

enet::Resolver vpvn_resolver();

// Firings of a complete session with pre-encrypt rekeys only.
// Throws std::invalid_argument for frames < 1.
std::size_t happy_path_length(std::size_t frames, std::size_t rekeys);

// General count: a post-decrypt rekey takes the place of that frame's t12
// and adds t1,t2,t3,t5,t6.
std::size_t path_length(std::size_t frames, std::size_t pre_encrypt_rekeys,
                        std::size_t post_decrypt_rekeys);

}  // namespace vpvn::model
