#include <gtest/gtest.h>

#include <functional>
#include <random>
#include <set>

#include "vpvn/crypto/entropy.hpp"
#include "vpvn/error.hpp"
#include "vpvn/media/layer.hpp"
#include "vpvn/media/packet.hpp"

namespace vpvn::media {
namespace {

Errc code_of(const std::function<void()>& f, Cause* cause = nullptr) {
  try {
    f();
  } catch (const Error& e) {
    if (cause) *cause = e.cause();
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::kMalformed;
}

crypto::SessionKey key_for(std::uint64_t session, std::uint32_t generation, std::uint64_t seed) {
  crypto::SeededEntropy e(seed, "media-test");
  return crypto::gen_session_key(e, session, generation);
}

struct Pair {
  SessionState tx;
  SessionState rx;

  explicit Pair(RekeyPolicy policy = {}, std::size_t window = 0,
                crypto::CipherSuite suite = crypto::CipherSuite::kAes256Gcm)
      : tx(7, crypto::Direction::kInitiator, policy, window, suite),
        rx(7, crypto::Direction::kResponder, policy, window, suite) {
    install_key(tx, key_for(7, 1, 1));
    install_key(rx, key_for(7, 1, 1));
  }
};

TEST(Packet, EmptySignalingIsHeaderOnly) {
  Bytes wire = encode_packet(make_packet(PacketType::kSignaling, {}));
  EXPECT_EQ(wire.size(), kHeaderSize);
  EXPECT_EQ(wire[0], kVersion);
}

TEST(Packet, HeaderLayout) {
  PacketHeader h;
  h.type = PacketType::kVideo;
  h.priority = 5;
  h.qos = 2;
  h.encrypted = true;
  h.session_id = 0x0102030405060708;
  h.sequence = 0x1112131415161718;
  h.payload_length = 0x21222324;
  EXPECT_EQ(to_hex(encode_header(h)),
            "0102" "35" "00" "0102030405060708" "1112131415161718" "21222324");
  EXPECT_EQ(decode_header(encode_header(h)), h);
}

TEST(Packet, RandomRoundTrip) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 500; ++i) {
    Bytes body(rng() % 300);
    for (auto& b : body) b = static_cast<std::uint8_t>(rng());
    MediaPacket p = make_packet(static_cast<PacketType>(rng() % 4), body,
                                static_cast<std::uint8_t>(rng() % 8),
                                static_cast<std::uint8_t>(rng() % 4), rng(), rng());
    if (body.size() >= crypto::kTagSize && rng() % 2) {
      p.header.encrypted = true;
      p.header.payload_length = static_cast<std::uint32_t>(body.size() - crypto::kTagSize);
    }
    EXPECT_EQ(decode_packet(encode_packet(p)), p);
  }
}

TEST(Packet, DecodeErrors) {
  Bytes wire = encode_packet(make_packet(PacketType::kAudio, Bytes{1, 2, 3}));
  EXPECT_EQ(code_of([&] { decode_packet(ByteView(wire).first(23)); }), Errc::kTruncated);
  Bytes v = wire;
  v[0] = 2;
  EXPECT_EQ(code_of([&] { decode_packet(v); }), Errc::kBadVersion);
  Bytes r = wire;
  r[3] = 1;
  EXPECT_EQ(code_of([&] { decode_packet(r); }), Errc::kNonzeroReserved);
  Bytes f = wire;
  f[2] |= 0x40;
  EXPECT_EQ(code_of([&] { decode_packet(f); }), Errc::kNonzeroReserved);
  Bytes t = wire;
  t[1] = 9;
  EXPECT_EQ(code_of([&] { decode_packet(t); }), Errc::kMalformed);
  Bytes longer = wire;
  longer.push_back(0);
  EXPECT_EQ(code_of([&] { decode_packet(longer); }), Errc::kLengthMismatch);
  Bytes shorter(wire.begin(), wire.end() - 1);
  EXPECT_EQ(code_of([&] { decode_packet(shorter); }), Errc::kLengthMismatch);
}

TEST(Packet, EncryptedLengthCountsTag) {
  Pair p;
  MediaPacket sealed = protect(make_packet(PacketType::kVideo, Bytes(40, 9)), p.tx);
  EXPECT_EQ(sealed.header.payload_length, 40u);
  EXPECT_EQ(sealed.body.size(), 40u + crypto::kTagSize);
  EXPECT_EQ(decode_packet(encode_packet(sealed)), sealed);
}

TEST(Packet, EncodeRejectsOutOfRangeFlags) {
  MediaPacket p = make_packet(PacketType::kAudio, {});
  p.header.priority = 8;
  EXPECT_THROW(encode_packet(p), Error);
  p.header.priority = 0;
  p.header.qos = 4;
  EXPECT_THROW(encode_packet(p), Error);
  MediaPacket wrong = make_packet(PacketType::kAudio, Bytes(3));
  wrong.header.payload_length = 4;
  EXPECT_EQ(code_of([&] { encode_packet(wrong); }), Errc::kLengthMismatch);
}

TEST(Packet, TypeNames) {
  for (PacketType t : {PacketType::kSignaling, PacketType::kAudio, PacketType::kVideo,
                       PacketType::kKeyMgmt}) {
    EXPECT_EQ(parse_packet_type(to_string(t)), t);
  }
}

TEST(Layer, PassthroughIsByteIdentical) {
  Pair p;
  for (PacketType t : {PacketType::kSignaling, PacketType::kKeyMgmt}) {
    MediaPacket in = make_packet(t, Bytes{'h', 'e', 'l', 'l', 'o'}, 3, 1, 99, 12);
    EXPECT_EQ(encode_packet(protect(in, p.tx)), encode_packet(in));
    EXPECT_EQ(encode_packet(unprotect(in, p.rx)), encode_packet(in));
  }
  EXPECT_EQ(p.tx.next_send_sequence(), 0u);
  SessionState keyless(1, crypto::Direction::kInitiator);
  EXPECT_NO_THROW(protect(make_packet(PacketType::kSignaling, {}), keyless));
}

TEST(Layer, MediaRoundTrip) {
  for (auto suite : {crypto::CipherSuite::kAes256Gcm, crypto::CipherSuite::kChaCha20Poly1305}) {
    Pair p({}, 0, suite);
    std::mt19937_64 rng(8);
    for (int i = 0; i < 50; ++i) {
      Bytes body(rng() % 2000);
      for (auto& b : body) b = static_cast<std::uint8_t>(rng());
      MediaPacket in = make_packet(i % 2 ? PacketType::kAudio : PacketType::kVideo, body,
                                   static_cast<std::uint8_t>(i % 8), static_cast<std::uint8_t>(i % 4));
      MediaPacket sealed = protect(in, p.tx);
      EXPECT_TRUE(sealed.header.encrypted);
      EXPECT_EQ(sealed.header.session_id, 7u);
      EXPECT_EQ(sealed.header.sequence, static_cast<std::uint64_t>(i));
      EXPECT_EQ(sealed.header.priority, in.header.priority);
      EXPECT_EQ(sealed.header.qos, in.header.qos);
      if (!body.empty()) {
        EXPECT_NE(Bytes(sealed.body.begin(), sealed.body.end() - crypto::kTagSize), body);
      }
      MediaPacket out = unprotect(decode_packet(encode_packet(sealed)), p.rx);
      EXPECT_EQ(out.body, body);
      EXPECT_FALSE(out.header.encrypted);
      EXPECT_EQ(out.header.type, in.header.type);
    }
  }
}

TEST(Layer, HeaderReadableWithoutKey) {
  Pair p;
  MediaPacket sealed = protect(make_packet(PacketType::kVideo, Bytes(10), 6, 3), p.tx);
  PacketHeader seen = decode_header(encode_packet(sealed));
  EXPECT_EQ(seen.priority, 6);
  EXPECT_EQ(seen.qos, 3);
  EXPECT_EQ(seen.type, PacketType::kVideo);
}

TEST(Layer, NoSessionKey) {
  SessionState s(1, crypto::Direction::kInitiator);
  MediaPacket m = make_packet(PacketType::kAudio, Bytes(4));
  EXPECT_EQ(code_of([&] { protect(m, s); }), Errc::kNoSessionKey);
  EXPECT_EQ(code_of([&] { unprotect(m, s); }), Errc::kNoSessionKey);
}

TEST(Layer, TamperingDetected) {
  Pair p;
  MediaPacket sealed = protect(make_packet(PacketType::kVideo, Bytes(32, 1), 2, 1), p.tx);
  Bytes wire = encode_packet(sealed);
  for (std::size_t bit = 0; bit < wire.size() * 8; ++bit) {
    Bytes m = wire;
    m[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    MediaPacket parsed;
    try {
      parsed = decode_packet(m);
    } catch (const Error&) {
      continue;  // rejected by framing already
    }
    Pair fresh;
    Errc c = code_of([&] { unprotect(parsed, fresh.rx); });
    EXPECT_TRUE(c == Errc::kIntegrityFailure || c == Errc::kLengthMismatch) << bit;
  }
}

TEST(Layer, RetypedCiphertextRejected) {
  Pair p;
  MediaPacket sealed = protect(make_packet(PacketType::kVideo, Bytes(8)), p.tx);
  for (PacketType t : {PacketType::kSignaling, PacketType::kKeyMgmt}) {
    MediaPacket m = sealed;
    m.header.type = t;
    EXPECT_EQ(code_of([&] { unprotect(m, p.rx); }), Errc::kIntegrityFailure);
  }
}

TEST(Layer, PriorityBitsAreBound) {
  Pair p;
  MediaPacket sealed = protect(make_packet(PacketType::kVideo, Bytes(8), 1, 0), p.tx);
  sealed.header.priority = 7;
  EXPECT_EQ(code_of([&] { unprotect(sealed, p.rx); }), Errc::kIntegrityFailure);
}

TEST(Layer, StrippedEncryptionFlag) {
  Pair p;
  MediaPacket sealed = protect(make_packet(PacketType::kAudio, Bytes(8)), p.tx);
  sealed.header.encrypted = false;
  EXPECT_EQ(code_of([&] { unprotect(sealed, p.rx); }), Errc::kIntegrityFailure);
}

TEST(Layer, StrictReplay) {
  Pair p;
  MediaPacket a = protect(make_packet(PacketType::kAudio, Bytes(8)), p.tx);
  MediaPacket b = protect(make_packet(PacketType::kAudio, Bytes(8)), p.tx);
  unprotect(b, p.rx);
  Cause cause = Cause::kNone;
  EXPECT_EQ(code_of([&] { unprotect(a, p.rx); }, &cause), Errc::kIntegrityFailure);
  EXPECT_EQ(cause, Cause::kReplay);
  EXPECT_EQ(code_of([&] { unprotect(b, p.rx); }, &cause), Errc::kIntegrityFailure);
  EXPECT_EQ(cause, Cause::kReplay);
  EXPECT_EQ(p.rx.receive_high_water(), 1u);
}

TEST(Layer, ReplayWindow) {
  Pair p({}, 64);
  std::vector<MediaPacket> sent;
  for (int i = 0; i < 70; ++i) sent.push_back(protect(make_packet(PacketType::kAudio, Bytes(4)), p.tx));
  unprotect(sent[69], p.rx);
  EXPECT_NO_THROW(unprotect(sent[10], p.rx));  // 59 below, inside the window
  Cause cause = Cause::kNone;
  EXPECT_EQ(code_of([&] { unprotect(sent[10], p.rx); }, &cause), Errc::kIntegrityFailure);
  EXPECT_EQ(cause, Cause::kReplay);
  EXPECT_EQ(code_of([&] { unprotect(sent[5], p.rx); }, &cause), Errc::kIntegrityFailure);
  EXPECT_EQ(cause, Cause::kReplay);  // 64 below: outside
  EXPECT_NO_THROW(unprotect(sent[6], p.rx));
}

TEST(Layer, ForgeryDoesNotAdvanceReplayState) {
  Pair p;
  MediaPacket a = protect(make_packet(PacketType::kAudio, Bytes(8)), p.tx);
  MediaPacket forged = a;
  forged.header.sequence = 1000;
  EXPECT_THROW(unprotect(forged, p.rx), Error);
  EXPECT_NO_THROW(unprotect(a, p.rx));
}

TEST(Layer, RekeyPolicyBoundary) {
  Pair p(RekeyPolicy{10, 1 << 30});
  EXPECT_FALSE(rekey_due(p.tx));
  MediaPacket m = make_packet(PacketType::kVideo, Bytes(16));
  for (int i = 0; i < 10; ++i) {
    EXPECT_FALSE(rekey_due(p.tx)) << i;
    protect(m, p.tx);
  }
  EXPECT_TRUE(rekey_due(p.tx));
  EXPECT_EQ(code_of([&] { protect(m, p.tx); }), Errc::kRekeyRequired);
  // Signaling keeps flowing while a rekey is pending.
  EXPECT_NO_THROW(protect(make_packet(PacketType::kSignaling, Bytes(3)), p.tx));
  install_key(p.tx, key_for(7, 2, 2));
  EXPECT_FALSE(rekey_due(p.tx));
  EXPECT_EQ(p.tx.packets_since_rekey(), 0u);
  EXPECT_NO_THROW(protect(m, p.tx));
}

TEST(Layer, ByteBudget) {
  Pair p(RekeyPolicy{1000, 100});
  protect(make_packet(PacketType::kVideo, Bytes(60)), p.tx);
  EXPECT_FALSE(rekey_due(p.tx));
  protect(make_packet(PacketType::kVideo, Bytes(40)), p.tx);
  EXPECT_TRUE(rekey_due(p.tx));
  EXPECT_EQ(p.tx.bytes_since_rekey(), 100u);
}

TEST(Layer, RequestedRekey) {
  Pair p;
  p.tx.request_rekey();
  EXPECT_TRUE(rekey_due(p.tx));
  install_key(p.tx, key_for(7, 2, 3));
  EXPECT_FALSE(rekey_due(p.tx));
}

TEST(Layer, InstallKeyGenerations) {
  SessionState s(7, crypto::Direction::kInitiator);
  install_key(s, key_for(7, 1, 1));
  install_key(s, key_for(7, 2, 1));
  EXPECT_EQ(s.generation(), 2u);
  EXPECT_EQ(code_of([&] { install_key(s, key_for(7, 1, 1)); }), Errc::kStaleGeneration);
  EXPECT_EQ(code_of([&] { install_key(s, key_for(7, 2, 1)); }), Errc::kStaleGeneration);
  EXPECT_EQ(code_of([&] { install_key(s, key_for(8, 3, 1)); }), Errc::kMalformed);
}

TEST(Layer, OldGenerationCiphertextFailsAfterInstall) {
  Pair p;
  MediaPacket before = protect(make_packet(PacketType::kVideo, Bytes(12, 5)), p.tx);
  install_key(p.rx, key_for(7, 2, 9));
  EXPECT_EQ(code_of([&] { unprotect(before, p.rx); }), Errc::kIntegrityFailure);
}

TEST(Layer, SequencesRestartAndNoncesStayUniquePerGeneration) {
  Pair p;
  std::set<std::tuple<std::uint32_t, int, std::uint64_t>> seen;
  MediaPacket m = make_packet(PacketType::kAudio, Bytes(4));
  for (std::uint32_t gen = 1; gen <= 3; ++gen) {
    if (gen > 1) install_key(p.tx, key_for(7, gen, gen));
    for (int i = 0; i < 20; ++i) {
      MediaPacket s = protect(m, p.tx);
      EXPECT_TRUE(seen.emplace(p.tx.generation(), 0, s.header.sequence).second);
    }
  }
  EXPECT_EQ(seen.size(), 60u);
}

TEST(Layer, ObserverSeesEncryptAndDecrypt) {
  Pair p;
  std::vector<model::EventKind> events;
  p.tx.set_observer([&](model::EventKind k) { events.push_back(k); });
  p.rx.set_observer([&](model::EventKind k) { events.push_back(k); });
  unprotect(protect(make_packet(PacketType::kAudio, Bytes(4)), p.tx), p.rx);
  protect(make_packet(PacketType::kSignaling, Bytes(4)), p.tx);
  EXPECT_EQ(events, (std::vector<model::EventKind>{model::EventKind::kFrameEncrypted,
                                                    model::EventKind::kFrameDecrypted}));
}

TEST(Layer, BothDirections) {
  Pair p;
  MediaPacket fwd = protect(make_packet(PacketType::kAudio, Bytes{1}), p.tx);
  MediaPacket back = protect(make_packet(PacketType::kAudio, Bytes{2}), p.rx);
  EXPECT_EQ(fwd.header.sequence, back.header.sequence);
  EXPECT_NE(fwd.body, back.body);
  EXPECT_EQ(unprotect(back, p.tx).body, Bytes{2});
  EXPECT_EQ(unprotect(fwd, p.rx).body, Bytes{1});
  // A party cannot open its own traffic: the direction differs.
  SessionState mirror(7, crypto::Direction::kInitiator);
  install_key(mirror, key_for(7, 1, 1));
  EXPECT_THROW(unprotect(fwd, mirror), Error);
}

}  // namespace
}  // namespace vpvn::media
