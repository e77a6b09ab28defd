#!/usr/bin/env python3
"""Writes tests/golden/vectors.json from an independent Python implementation
of the deterministic entropy stream, key wrap, request envelope and media
framing. The C++ tests compare their output against this file."""

import hashlib
import json
import struct
import sys
from pathlib import Path

from cryptography.hazmat.primitives import hashes, serialization
from cryptography.hazmat.primitives.asymmetric import ec
from cryptography.hazmat.primitives.ciphers.aead import AESGCM, ChaCha20Poly1305
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

P256_N = 0xFFFFFFFF00000000FFFFFFFFFFFFFFFFBCE6FAADA7179E84F3B9CAC2FC632551


def u16(v): return struct.pack(">H", v)
def u32(v): return struct.pack(">I", v)
def u64(v): return struct.pack(">Q", v)
def lp(s): return u16(len(s)) + s.encode()


class Stream:
    def __init__(self, seed, label):
        self.prefix = lp(label) + u64(seed)
        self.counter = 0

    def read(self, n):
        out = b""
        while len(out) < n:
            block = hashlib.sha256(self.prefix + u64(self.counter)).digest()
            self.counter += 1
            out += block[: n - len(out)]
        return out

    def u64(self):
        return struct.unpack(">Q", self.read(8))[0]


def keypair(stream):
    while True:
        raw = stream.read(32)
        d = int.from_bytes(raw, "big")
        if 1 <= d < P256_N:
            priv = ec.derive_private_key(d, ec.SECP256R1())
            return priv, point(priv.public_key())


def point(pub):
    return pub.public_bytes(serialization.Encoding.X962,
                            serialization.PublicFormat.UncompressedPoint)


def hkdf(ikm, salt, info, n):
    return HKDF(hashes.SHA256(), n, salt, info).derive(ikm)


def wrap(key, session, generation, recipient_id, recipient_pub, stream):
    eph, eph_pub = keypair(stream)
    shared = eph.exchange(ec.ECDH(), recipient_pub)
    okm = hkdf(shared, eph_pub + point(recipient_pub), b"vpvn key wrap v1", 44)
    ad = b"vpvn-wrap" + lp(recipient_id) + u64(session) + u32(generation)
    return eph_pub + AESGCM(okm[:32]).encrypt(okm[32:], key, ad)


def request_envelope(requester, requester_priv, kdc_pub, session, nonce, purpose, peer, stream):
    eph, eph_pub = keypair(stream)
    ikm = eph.exchange(ec.ECDH(), kdc_pub) + requester_priv.exchange(ec.ECDH(), kdc_pub)
    okm = hkdf(ikm, eph_pub + point(kdc_pub), b"vpvn key request v1", 44)
    ad = b"vpvn-req" + lp(requester) + u64(session) + u64(nonce)
    sealed = AESGCM(okm[:32]).encrypt(okm[32:], bytes([purpose]) + lp(peer), ad)
    return eph_pub, sealed[:-16], sealed[-16:]


def header(ptype, priority, qos, encrypted, session, seq, length):
    flags = (priority & 7) | ((qos & 3) << 3) | (0x20 if encrypted else 0)
    return bytes([1, ptype, flags, 0]) + u64(session) + u64(seq) + u32(length)


def nonce(direction, seq):
    return bytes([direction, 0, 0, 0]) + u64(seq)


def media_vectors():
    out = []
    key = bytes(32)
    cases = [
        ("aes-256-gcm", AESGCM, 1, 5, 2, 0x0123456789abcdef, 0, 0, b"frame zero payload"),
        ("aes-256-gcm", AESGCM, 2, 7, 3, 0x0123456789abcdef, 1, 41, bytes(range(64))),
        ("aes-256-gcm", AESGCM, 2, 0, 0, 1, 0, 9, b""),
        ("chacha20-poly1305", ChaCha20Poly1305, 1, 3, 1, 0xfedcba9876543210, 1, 2, b"audio"),
    ]
    for suite, cls, ptype, prio, qos, session, direction, seq, payload in cases:
        hdr = header(ptype, prio, qos, True, session, seq, len(payload))
        sealed = cls(key).encrypt(nonce(direction, seq), payload, hdr)
        out.append({
            "suite": suite, "type": ptype, "priority": prio, "qos": qos,
            "session": f"{session:016x}", "direction": direction, "sequence": seq,
            "payload": payload.hex(), "wire": (hdr + sealed).hex(),
        })
    return out


def main():
    vectors = {}

    s = Stream(42, "vector")
    vectors["entropy"] = {"seed": 42, "label": "vector", "first_80": s.read(80).hex()}

    kp_stream = Stream(7, "keys/alice")
    priv, pub = keypair(kp_stream)
    vectors["keypair"] = {
        "seed": 7, "label": "keys/alice",
        "scalar": f"{priv.private_numbers().private_value:064x}", "public": pub.hex(),
    }

    recipient, recipient_pub = keypair(Stream(11, "keys/bob"))
    session_key = Stream(11, "session").read(32)
    blob = wrap(session_key, 0x1122334455667788, 3, "bob", recipient.public_key(), Stream(11, "wrap"))
    vectors["wrap"] = {
        "recipient_seed": 11, "recipient_label": "keys/bob", "recipient_id": "bob",
        "session": "1122334455667788", "generation": 3, "key": session_key.hex(),
        "entropy_seed": 11, "entropy_label": "wrap", "blob": blob.hex(),
    }

    requester, _ = keypair(Stream(5, "keys/carol"))
    kdc, kdc_pub = keypair(Stream(5, "keys/kdc"))
    eph, ct, tag = request_envelope("carol", requester, kdc.public_key(), 0x99, 0x1234, 0,
                                    "dave", Stream(5, "request"))
    vectors["request"] = {
        "seed": 5, "requester": "carol", "requester_label": "keys/carol",
        "kdc_label": "keys/kdc", "session": "0000000000000099", "nonce": "0000000000001234",
        "purpose": 0, "peer": "dave", "entropy_label": "request",
        "ephemeral": eph.hex(), "ciphertext": ct.hex(), "tag": tag.hex(),
    }

    vectors["media"] = media_vectors()

    # RFC 5869, test case 1.
    vectors["hkdf"] = {
        "ikm": "0b" * 22, "salt": "000102030405060708090a0b0c",
        "info": "f0f1f2f3f4f5f6f7f8f9", "length": 42,
        "okm": hkdf(bytes.fromhex("0b" * 22), bytes.fromhex("000102030405060708090a0b0c"),
                    bytes.fromhex("f0f1f2f3f4f5f6f7f8f9"), 42).hex(),
    }

    target = Path(sys.argv[1]) if len(sys.argv) > 1 else \
        Path(__file__).resolve().parent.parent / "tests" / "golden" / "vectors.json"
    target.write_text(json.dumps(vectors, indent=2) + "\n")


if __name__ == "__main__":
    main()
