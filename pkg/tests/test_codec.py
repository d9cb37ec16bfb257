"""Canonical encoding: determinism, locality, and round-trip behavior."""

import random

import pytest

from ballotchain import codec
from ballotchain.codec import Reader
from ballotchain.core import KIND_MINT, KIND_SWEEP, KIND_VOTE, Transaction
from ballotchain.errors import DecodeError


def random_tx(rng: random.Random) -> Transaction:
    kind = rng.choice([KIND_VOTE, KIND_MINT, KIND_SWEEP])
    return Transaction(
        election_id=f"e-{rng.randrange(1000)}",
        from_pubkey=rng.randbytes(32),
        to_address=rng.randbytes(20),
        amount=rng.randrange(0, 2**40),
        timestamp=rng.randrange(0, 2**32),
        nonce=rng.randrange(0, 2**20),
        kind=kind,
        memo=rng.randbytes(rng.randrange(0, 40)),
        signature=rng.randbytes(64),
    )


def test_zero_integer_encodes_as_eight_zero_bytes():
    assert codec.encode_u64(0) == b"\x00" * 8
    reader = Reader(codec.encode_u64(0))
    assert reader.u64() == 0


def test_nonce_zero_round_trips_in_place(rng):
    tx = random_tx(rng)
    tx = Transaction(**{**tx.__dict__, "nonce": 0})
    decoded = Transaction.decode(tx.wire_bytes())
    assert decoded.nonce == 0
    assert decoded == tx


def test_nonce_difference_is_local(rng):
    """Two txs differing only in nonce differ only in that 8-byte window."""
    tx_a = random_tx(rng)
    tx_b = Transaction(**{**tx_a.__dict__, "nonce": tx_a.nonce + 1})
    raw_a, raw_b = tx_a.wire_bytes(), tx_b.wire_bytes()
    assert len(raw_a) == len(raw_b)
    diff = [i for i in range(len(raw_a)) if raw_a[i] != raw_b[i]]
    assert diff, "nonce change must alter the encoding"
    window = set(range(min(diff), min(diff) + 8))
    assert set(diff) <= window


def test_round_trip_one_thousand_random_txs():
    rng = random.Random(4242)
    for _ in range(1000):
        tx = random_tx(rng)
        decoded = Transaction.decode(tx.wire_bytes())
        assert decoded == tx
        assert decoded.canonical_bytes() == tx.canonical_bytes()


def test_canonical_bytes_zero_signature(rng):
    tx = random_tx(rng)
    canonical = tx.canonical_bytes()
    # the signature field is present but zeroed: 4-byte length + 64 zeros
    assert canonical.endswith(codec.U32.pack(64) + b"\x00" * 64)
    assert tx.wire_bytes().endswith(codec.U32.pack(64) + tx.signature)


def test_strings_are_length_prefixed():
    raw = codec.encode_str("abc")
    assert raw == b"\x00\x00\x00\x03abc"
    assert Reader(raw).str_field() == "abc"


def test_decoder_rejects_short_buffers(rng):
    tx = random_tx(rng)
    raw = tx.wire_bytes()
    with pytest.raises(DecodeError):
        Transaction.decode(raw[:-1])
    with pytest.raises(DecodeError):
        Transaction.decode(raw + b"\x00")


def test_decoder_rejects_absurd_lengths():
    with pytest.raises(DecodeError):
        Reader(codec.U32.pack(2**31) + b"xx").bytes_field()


def test_unknown_kind_rejected_at_decode(rng):
    tx = random_tx(rng)
    raw = tx.wire_bytes()
    mangled = raw.replace(tx.kind.encode(), b"door"[: len(tx.kind)], 1)
    with pytest.raises(DecodeError):
        Transaction.decode(mangled)
