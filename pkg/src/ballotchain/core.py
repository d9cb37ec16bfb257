"""Transactions and blocks: the ledger's canonical record types.

A transaction is a signed token transfer.  Ballots are ``vote`` transfers
from a voter key to a candidate or abstain address; the election authority
signs ``mint`` grants (token creation) and post-close ``sweep`` moves of
residual balances.  The sweep's debited account travels in ``memo`` since
the sender field must stay bound to the signing key.

Blocks batch transactions, hash-link to their parent, and carry the quorum
signatures gathered at finalization.  The block hash covers the header and
the full transaction encodings but not the quorum signatures (nodes sign
the hash itself).
"""

import math
from dataclasses import dataclass, field, replace

from . import codec
from .codec import Reader
from .crypto import (
    ADDRESS_SIZE,
    DIGEST_SIZE,
    PUBKEY_SIZE,
    SIGNATURE_SIZE,
    ZERO_DIGEST,
    ZERO_SIGNATURE,
    KeyPair,
    hash_bytes,
    verify_signature,
)
from .errors import DecodeError

KIND_VOTE = "vote"
KIND_MINT = "mint"
KIND_SWEEP = "sweep"
TX_KINDS = (KIND_VOTE, KIND_MINT, KIND_SWEEP)

GENESIS_PROPOSER = "genesis"
TX_SIGN_TAG = b"ballot-tx:"
BLOCK_SIGN_TAG = b"block-finalize:"


@dataclass(frozen=True)
class Transaction:
    election_id: str
    from_pubkey: bytes
    to_address: bytes
    amount: int
    timestamp: int
    nonce: int
    kind: str = KIND_VOTE
    memo: bytes = b""
    signature: bytes = ZERO_SIGNATURE

    def __post_init__(self):
        if len(self.from_pubkey) != PUBKEY_SIZE:
            raise ValueError("from_pubkey must be 32 bytes")
        if len(self.to_address) != ADDRESS_SIZE:
            raise ValueError("to_address must be 20 bytes")
        if len(self.signature) != SIGNATURE_SIZE:
            raise ValueError("signature must be 64 bytes")
        if self.amount < 0 or self.timestamp < 0 or self.nonce < 0:
            raise ValueError("amount, timestamp, nonce are non-negative")
        if self.kind not in TX_KINDS:
            raise ValueError(f"unknown transaction kind {self.kind!r}")

    def canonical_bytes(self) -> bytes:
        """Signing preimage: declared field order, signature zeroed."""
        return self._encode(signature=ZERO_SIGNATURE)

    def wire_bytes(self) -> bytes:
        return self._encode(signature=self.signature)

    def _encode(self, signature: bytes) -> bytes:
        return b"".join(
            (
                codec.encode_str(self.election_id),
                codec.encode_bytes(self.from_pubkey),
                codec.encode_bytes(self.to_address),
                codec.encode_u64(self.amount),
                codec.encode_u64(self.timestamp),
                codec.encode_u64(self.nonce),
                codec.encode_str(self.kind),
                codec.encode_bytes(self.memo),
                codec.encode_bytes(signature),
            )
        )

    def tx_hash(self) -> bytes:
        """Identifier: digest of the full wire encoding (signature included)."""
        return hash_bytes(self.wire_bytes())

    def is_system(self) -> bool:
        return self.kind in (KIND_MINT, KIND_SWEEP)

    @staticmethod
    def read_from(reader: Reader) -> "Transaction":
        election_id = reader.str_field()
        from_pubkey = reader.bytes_field()
        to_address = reader.bytes_field()
        amount = reader.u64()
        timestamp = reader.u64()
        nonce = reader.u64()
        kind = reader.str_field()
        memo = reader.bytes_field()
        signature = reader.bytes_field()
        try:
            return Transaction(
                election_id, from_pubkey, to_address, amount,
                timestamp, nonce, kind, memo, signature,
            )
        except ValueError as exc:
            raise DecodeError(str(exc)) from exc

    @classmethod
    def decode(cls, data: bytes) -> "Transaction":
        reader = Reader(data)
        tx = cls.read_from(reader)
        reader.expect_end()
        return tx


def sign_transaction(tx: Transaction, key: KeyPair) -> Transaction:
    """Attach the sender's signature.  Refuses a key that is not the sender."""
    if key.public_key != tx.from_pubkey:
        raise ValueError("signing key does not match from_pubkey")
    sig = key.sign(TX_SIGN_TAG + tx.canonical_bytes())
    return replace(tx, signature=sig)


def transaction_signature_valid(tx: Transaction) -> bool:
    return verify_signature(
        tx.from_pubkey, TX_SIGN_TAG + tx.canonical_bytes(), tx.signature
    )


@dataclass(frozen=True)
class Block:
    index: int
    prev_hash: bytes
    timestamp: int
    transactions: tuple
    proposer_id: str
    quorum_signatures: tuple = ()  # of (node_id, signature)
    block_hash: bytes = ZERO_DIGEST

    def __post_init__(self):
        if len(self.prev_hash) != DIGEST_SIZE:
            raise ValueError("prev_hash must be 32 bytes")
        if self.index < 0 or self.timestamp < 0:
            raise ValueError("index and timestamp are non-negative")

    def canonical_bytes(self) -> bytes:
        """Header + body; quorum signatures and the stored hash excluded."""
        return b"".join(
            (
                codec.encode_u64(self.index),
                codec.encode_bytes(self.prev_hash),
                codec.encode_u64(self.timestamp),
                codec.encode_list(self.transactions, lambda tx: tx.wire_bytes()),
                codec.encode_str(self.proposer_id),
            )
        )

    def compute_hash(self) -> bytes:
        return hash_bytes(self.canonical_bytes())

    def sealed(self) -> "Block":
        return replace(self, block_hash=self.compute_hash())

    def with_signatures(self, signatures) -> "Block":
        return replace(self, quorum_signatures=tuple(signatures))

    @property
    def size_kb(self) -> int:
        """Canonical byte length in KB, rounded up."""
        return math.ceil(len(self.canonical_bytes()) / 1024)

    def wire_bytes(self) -> bytes:
        return b"".join(
            (
                self.canonical_bytes(),
                codec.encode_list(
                    self.quorum_signatures,
                    lambda s: codec.encode_str(s[0]) + codec.encode_bytes(s[1]),
                ),
                codec.encode_bytes(self.block_hash),
            )
        )

    @classmethod
    def decode(cls, data: bytes) -> "Block":
        reader = Reader(data)
        index = reader.u64()
        prev_hash = reader.bytes_field()
        timestamp = reader.u64()
        txs = reader.list_field(Transaction.read_from)

        def read_sig(r: Reader):
            return (r.str_field(), r.bytes_field())

        proposer_id = reader.str_field()
        signatures = reader.list_field(read_sig)
        block_hash = reader.bytes_field()
        reader.expect_end()
        try:
            return cls(
                index, prev_hash, timestamp, tuple(txs),
                proposer_id, tuple(signatures), block_hash,
            )
        except ValueError as exc:
            raise DecodeError(str(exc)) from exc


def sign_block_hash(block_hash: bytes, key: KeyPair) -> bytes:
    return key.sign(BLOCK_SIGN_TAG + block_hash)


def block_signature_valid(block_hash: bytes, public_key: bytes, signature: bytes) -> bool:
    return verify_signature(public_key, BLOCK_SIGN_TAG + block_hash, signature)
