"""Hashing and signature primitives against independent expectations."""

import random

import pytest

from ballotchain.core import Transaction, sign_transaction, transaction_signature_valid
from ballotchain.crypto import (
    KeyPair,
    derive_address,
    hash_bytes,
    to_hex,
    verify_signature,
)

# Published SHA-256 digest of the empty message (FIPS 180-4 test vector).
EMPTY_SHA256 = "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"


def test_empty_input_matches_published_digest():
    assert to_hex(hash_bytes(b"")) == EMPTY_SHA256


def test_hash_is_deterministic():
    assert hash_bytes(b"ballot") == hash_bytes(b"ballot")
    assert len(hash_bytes(b"ballot")) == 32


def test_hex_rendering_is_lowercase_64_chars():
    digest = to_hex(hash_bytes(b"ballot"))
    assert len(digest) == 64
    assert digest == digest.lower()
    assert not digest.startswith("0x")


def test_single_bit_flips_change_digest_10k_trials():
    rng = random.Random(77)
    for _ in range(10_000):
        msg = bytearray(rng.randbytes(rng.randrange(1, 64)))
        base = hash_bytes(bytes(msg))
        i = rng.randrange(len(msg))
        msg[i] ^= 1 << rng.randrange(8)
        assert hash_bytes(bytes(msg)) != base


def test_address_derivation_is_deterministic():
    key = KeyPair.from_seed(b"\x07" * 32)
    again = KeyPair.from_seed(b"\x07" * 32)
    assert key.public_key == again.public_key
    assert key.address == again.address == derive_address(key.public_key)
    assert len(key.address) == 20


def _ballot(voter: KeyPair, to_address: bytes) -> Transaction:
    return Transaction(
        election_id="e1",
        from_pubkey=voter.public_key,
        to_address=to_address,
        amount=1,
        timestamp=123,
        nonce=0,
    )


def test_sign_then_verify():
    voter = KeyPair.from_seed(b"\x01" * 32)
    tx = sign_transaction(_ballot(voter, b"\x22" * 20), voter)
    assert transaction_signature_valid(tx)


def test_signing_refuses_mismatched_key():
    voter = KeyPair.from_seed(b"\x01" * 32)
    other = KeyPair.from_seed(b"\x02" * 32)
    with pytest.raises(ValueError):
        sign_transaction(_ballot(voter, b"\x22" * 20), other)


def test_tampered_recipient_fails_for_every_byte_position():
    voter = KeyPair.from_seed(b"\x03" * 32)
    tx = sign_transaction(_ballot(voter, bytes(range(20))), voter)
    for pos in range(20):
        for flip in (0x01, 0x80, 0xFF):
            mangled = bytearray(tx.to_address)
            mangled[pos] ^= flip
            tampered = Transaction(
                **{**tx.__dict__, "to_address": bytes(mangled)}
            )
            assert not transaction_signature_valid(tampered), (pos, flip)


def test_wrong_public_key_fails():
    voter = KeyPair.from_seed(b"\x04" * 32)
    other = KeyPair.from_seed(b"\x05" * 32)
    tx = sign_transaction(_ballot(voter, b"\x22" * 20), voter)
    assert not verify_signature(other.public_key, tx.canonical_bytes(), tx.signature)
    swapped = Transaction(**{**tx.__dict__, "from_pubkey": other.public_key})
    assert not transaction_signature_valid(swapped)


def test_malformed_key_material_is_rejected_not_raised():
    assert not verify_signature(b"short", b"msg", b"\x00" * 64)
    assert not verify_signature(b"\xab" * 32, b"msg", b"short")


def test_small_order_pubkeys_never_verify():
    # the all-zero key + all-zero signature would otherwise pass for ANY message
    from ballotchain.crypto import SMALL_ORDER_PUBKEYS

    assert len(SMALL_ORDER_PUBKEYS) == 14
    for key in SMALL_ORDER_PUBKEYS:
        assert not verify_signature(key, b"msg", b"\x00" * 64)
