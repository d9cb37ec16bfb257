"""Hashing, keypairs, signatures, and address derivation.

Digests are SHA-256 (32 bytes, rendered lowercase hex).  Signatures are
Ed25519 with 32-byte public keys and 64-byte signatures.  An address is the
first 20 bytes of the SHA-256 of the public key.
"""

import hashlib

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)
from cryptography.hazmat.primitives.serialization import (
    Encoding,
    NoEncryption,
    PrivateFormat,
    PublicFormat,
)

DIGEST_SIZE = 32
PUBKEY_SIZE = 32
ADDRESS_SIZE = 20
SIGNATURE_SIZE = 64

ZERO_DIGEST = b"\x00" * DIGEST_SIZE
ZERO_SIGNATURE = b"\x00" * SIGNATURE_SIZE

# Small-order curve points (libsodium's blacklist, both sign bits).  A
# signature "verifies" under these for any message, so they are never
# acceptable as signer identities.
_SMALL_ORDER_HEX = (
    "0000000000000000000000000000000000000000000000000000000000000000",
    "0100000000000000000000000000000000000000000000000000000000000000",
    "26e8958fc2b227b045c3f489f2ef98f0d5dfac05d3c63339b13802886d53fc05",
    "c7176a703d4dd84fba3c0b760d10670f2a2053fa2c39ccc64ec7fd7792ac037a",
    "ecffffffffffffffffffffffffffffffffffffffffffffffffffffffffffff7f",
    "edffffffffffffffffffffffffffffffffffffffffffffffffffffffffffff7f",
    "eeffffffffffffffffffffffffffffffffffffffffffffffffffffffffffff7f",
)
SMALL_ORDER_PUBKEYS = frozenset(
    bytes.fromhex(h) for h in _SMALL_ORDER_HEX
) | frozenset(
    bytes.fromhex(h)[:-1] + bytes([bytes.fromhex(h)[-1] | 0x80])
    for h in _SMALL_ORDER_HEX
)


def hash_bytes(data: bytes) -> bytes:
    """32-byte SHA-256 digest of ``data``."""
    return hashlib.sha256(data).digest()


def to_hex(raw: bytes) -> str:
    return raw.hex()


def from_hex(text: str, expected_len: int | None = None) -> bytes:
    raw = bytes.fromhex(text)
    if expected_len is not None and len(raw) != expected_len:
        raise ValueError(f"expected {expected_len} bytes, got {len(raw)}")
    return raw


def derive_address(public_key: bytes) -> bytes:
    """First 20 bytes of SHA-256(public_key).  Deterministic."""
    if len(public_key) != PUBKEY_SIZE:
        raise ValueError("public key must be 32 bytes")
    return hash_bytes(public_key)[:ADDRESS_SIZE]


def tagged_address(tag: str) -> bytes:
    """Deterministic keyless address (candidate / abstain sinks)."""
    return hash_bytes(b"addr:" + tag.encode("utf-8"))[:ADDRESS_SIZE]


class KeyPair:
    """Ed25519 signing keypair.  The secret key is never serialized to chain."""

    def __init__(self, private: Ed25519PrivateKey):
        self._private = private
        self.public_key = private.public_key().public_bytes(
            Encoding.Raw, PublicFormat.Raw
        )
        self.address = derive_address(self.public_key)

    @classmethod
    def generate(cls) -> "KeyPair":
        return cls(Ed25519PrivateKey.generate())

    @classmethod
    def from_seed(cls, seed: bytes) -> "KeyPair":
        """Deterministic keypair from a 32-byte seed (tests, simulations)."""
        if len(seed) != 32:
            seed = hash_bytes(seed)
        return cls(Ed25519PrivateKey.from_private_bytes(seed))

    def secret_bytes(self) -> bytes:
        return self._private.private_bytes(
            Encoding.Raw, PrivateFormat.Raw, NoEncryption()
        )

    @classmethod
    def from_secret_bytes(cls, raw: bytes) -> "KeyPair":
        return cls(Ed25519PrivateKey.from_private_bytes(raw))

    def sign(self, message: bytes) -> bytes:
        return self._private.sign(message)


def verify_signature(public_key: bytes, message: bytes, signature: bytes) -> bool:
    if len(public_key) != PUBKEY_SIZE or len(signature) != SIGNATURE_SIZE:
        return False
    if public_key in SMALL_ORDER_PUBKEYS:
        return False
    try:
        Ed25519PublicKey.from_public_bytes(public_key).verify(signature, message)
        return True
    except (InvalidSignature, ValueError):
        return False
