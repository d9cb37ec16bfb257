"""Account state, transaction verification, and append-only chain handling.

Verification rules, in precedence order when several would fail:
signature, window, recipient, double-vote, duplicate-mint, nonce, balance.
System transactions (mint/sweep) must be signed by the election authority
and bypass balance/spent-key checks; everything else gets the full battery.
"""

import os
from dataclasses import dataclass

from . import codec
from .codec import U32, Reader
from .config import ElectionConfig
from .core import (
    GENESIS_PROPOSER,
    KIND_MINT,
    KIND_SWEEP,
    KIND_VOTE,
    Block,
    Transaction,
    block_signature_valid,
    sign_transaction,
    transaction_signature_valid,
)
from .crypto import ADDRESS_SIZE, ZERO_DIGEST, KeyPair, derive_address
from .errors import (
    BAD_NONCE,
    BAD_SIGNATURE,
    DOUBLE_VOTE,
    DUPLICATE_MINT,
    INSUFFICIENT_BALANCE,
    OUTSIDE_WINDOW,
    UNKNOWN_RECIPIENT,
    BuildRejected,
    CorruptStore,
    DecodeError,
    InvalidTx,
    NonLinking,
    NotFinalized,
)


class LedgerState:
    """Balances, per-address nonces, spent voter keys, and mint bookkeeping."""

    def __init__(self):
        self.balances = {}        # address -> tokens
        self.next_nonce = {}      # address -> next expected nonce
        self.spent_keys = set()   # voter public keys that have cast a ballot
        self.minted_addresses = set()
        self.total_minted = 0
        self.voted_tokens = 0
        self.sweeps_applied = 0

    def copy(self) -> "LedgerState":
        dup = LedgerState()
        dup.balances = dict(self.balances)
        dup.next_nonce = dict(self.next_nonce)
        dup.spent_keys = set(self.spent_keys)
        dup.minted_addresses = set(self.minted_addresses)
        dup.total_minted = self.total_minted
        dup.voted_tokens = self.voted_tokens
        dup.sweeps_applied = self.sweeps_applied
        return dup

    def balance(self, address: bytes) -> int:
        return self.balances.get(address, 0)

    def nonce(self, address: bytes) -> int:
        return self.next_nonce.get(address, 0)


def verify_transaction(tx: Transaction, state: LedgerState, cfg: ElectionConfig):
    """Return None to accept, or the reject reason string."""
    if tx.election_id != cfg.election_id:
        return BAD_SIGNATURE  # signature does not attest to this election's ballot
    if not transaction_signature_valid(tx):
        return BAD_SIGNATURE

    sender = derive_address(tx.from_pubkey)

    if tx.is_system():
        if tx.from_pubkey != cfg.authority_pubkey:
            return BAD_SIGNATURE
        if tx.kind == KIND_MINT:
            if tx.timestamp > cfg.end_time:
                return OUTSIDE_WINDOW
            if tx.amount > 0 and tx.to_address in state.minted_addresses:
                return DUPLICATE_MINT
        else:  # sweep
            if tx.timestamp <= cfg.end_time:
                return OUTSIDE_WINDOW
            if tx.to_address != cfg.abstain_address:
                return UNKNOWN_RECIPIENT
            if len(tx.memo) != ADDRESS_SIZE:
                return UNKNOWN_RECIPIENT
            source = tx.memo
            if source in cfg.vote_targets:
                return UNKNOWN_RECIPIENT
            if state.balance(source) < tx.amount:
                return INSUFFICIENT_BALANCE
        if tx.nonce != state.nonce(sender):
            return BAD_NONCE
        return None

    # ballot transfer
    if not (cfg.start_time <= tx.timestamp <= cfg.end_time):
        return OUTSIDE_WINDOW
    if tx.to_address not in cfg.vote_targets:
        return UNKNOWN_RECIPIENT
    if tx.from_pubkey in state.spent_keys:
        return DOUBLE_VOTE
    if tx.nonce != state.nonce(sender):
        return BAD_NONCE
    if tx.amount < 1 or state.balance(sender) < tx.amount:
        return INSUFFICIENT_BALANCE
    return None


def apply_transaction(state: LedgerState, tx: Transaction):
    """Mutate ``state`` with an already-verified transaction."""
    sender = derive_address(tx.from_pubkey)
    if tx.kind == KIND_MINT:
        state.balances[tx.to_address] = state.balance(tx.to_address) + tx.amount
        if tx.amount > 0:
            state.minted_addresses.add(tx.to_address)
        state.total_minted += tx.amount
    elif tx.kind == KIND_SWEEP:
        source = tx.memo
        state.balances[source] = state.balance(source) - tx.amount
        state.balances[tx.to_address] = state.balance(tx.to_address) + tx.amount
        state.sweeps_applied += 1
    else:
        state.balances[sender] = state.balance(sender) - tx.amount
        state.balances[tx.to_address] = state.balance(tx.to_address) + tx.amount
        state.spent_keys.add(tx.from_pubkey)
        state.voted_tokens += tx.amount
    state.next_nonce[sender] = tx.nonce + 1


def make_genesis(cfg: ElectionConfig, authority: KeyPair) -> Block:
    """Index-0 block carrying a zero-amount mint that commits to the config."""
    if authority.public_key != cfg.authority_pubkey:
        raise ValueError("authority key does not match config")
    commit = sign_transaction(
        Transaction(
            election_id=cfg.election_id,
            from_pubkey=authority.public_key,
            to_address=cfg.abstain_address,
            amount=0,
            timestamp=cfg.genesis_time,
            nonce=0,
            kind=KIND_MINT,
            memo=cfg.params_digest(),
        ),
        authority,
    )
    return Block(
        index=0,
        prev_hash=ZERO_DIGEST,
        timestamp=cfg.genesis_time,
        transactions=(commit,),
        proposer_id=GENESIS_PROPOSER,
    ).sealed()


def build_block(
    state: LedgerState,
    cfg: ElectionConfig,
    parent: Block,
    txs,
    proposer_id: str,
    now: int,
) -> Block:
    """Assemble the next block; every tx must verify in list order."""
    working = state.copy()
    for i, tx in enumerate(txs):
        reason = verify_transaction(tx, working, cfg)
        if reason is not None:
            raise BuildRejected(i, reason)
        apply_transaction(working, tx)
    return Block(
        index=parent.index + 1,
        prev_hash=parent.block_hash,
        timestamp=max(now, parent.timestamp),
        transactions=tuple(txs),
        proposer_id=proposer_id,
    ).sealed()


def count_quorum_signatures(block: Block, cfg: ElectionConfig) -> int:
    """Distinct roster nodes with a valid signature over the block hash."""
    signed = set()
    for node_id, sig in block.quorum_signatures:
        if node_id in signed or node_id not in cfg.roster:
            continue
        if block_signature_valid(block.block_hash, cfg.roster.public_key(node_id), sig):
            signed.add(node_id)
    return len(signed)


def certificate_is_clean(block: Block, cfg: ElectionConfig) -> bool:
    """Every stored signature must verify; a corrupt entry taints the block.

    Nodes only persist signatures they have checked, so a stored certificate
    with a bad entry is evidence of tampering even when a quorum survives.
    """
    seen = set()
    for node_id, sig in block.quorum_signatures:
        if node_id in seen or node_id not in cfg.roster:
            return False
        if not block_signature_valid(
            block.block_hash, cfg.roster.public_key(node_id), sig
        ):
            return False
        seen.add(node_id)
    return True


def block_is_finalized(block: Block, cfg: ElectionConfig) -> bool:
    if block.index == 0:
        return True  # genesis is fixed by the config commitment, not by quorum
    if not certificate_is_clean(block, cfg):
        return False
    return len(block.quorum_signatures) >= cfg.roster.quorum_threshold


# chain-structure failure reasons reported by validate_chain
BAD_LINK = "BadLink"
BAD_HASH = "BadHash"
BAD_TIMESTAMP = "BadTimestamp"
BAD_GENESIS = "BadGenesis"
NOT_FINALIZED = "NotFinalized"


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    bad_index: int | None = None
    reason: str | None = None

    def __bool__(self):
        return self.ok


def _check_genesis(block: Block, cfg: ElectionConfig):
    if block.index != 0 or block.prev_hash != ZERO_DIGEST:
        return BAD_GENESIS
    if block.proposer_id != GENESIS_PROPOSER or len(block.transactions) != 1:
        return BAD_GENESIS
    commit = block.transactions[0]
    if commit.kind != KIND_MINT or commit.amount != 0:
        return BAD_GENESIS
    if commit.memo != cfg.params_digest():
        return BAD_GENESIS
    return None


def validate_chain(blocks, cfg: ElectionConfig) -> ValidationResult:
    """Full replay: hash links, block hashes, quorum and tx signatures, state.

    Reports the earliest violation.
    """
    if not blocks:
        return ValidationResult(False, 0, BAD_GENESIS)
    state = LedgerState()
    for i, block in enumerate(blocks):
        if block.index != i:
            return ValidationResult(False, i, BAD_LINK)
        if block.block_hash != block.compute_hash():
            return ValidationResult(False, i, BAD_HASH)
        if i == 0:
            reason = _check_genesis(block, cfg)
            if reason is not None:
                return ValidationResult(False, 0, reason)
        else:
            parent = blocks[i - 1]
            if block.prev_hash != parent.block_hash:
                return ValidationResult(False, i, BAD_LINK)
            if block.timestamp < parent.timestamp:
                return ValidationResult(False, i, BAD_TIMESTAMP)
            if not block_is_finalized(block, cfg):
                return ValidationResult(False, i, NOT_FINALIZED)
        for tx in block.transactions:
            reason = verify_transaction(tx, state, cfg)
            if reason is not None:
                return ValidationResult(False, i, reason)
            apply_transaction(state, tx)
    return ValidationResult(True)


def replay_state(blocks, cfg: ElectionConfig) -> LedgerState:
    """Reconstruct the tip state from a chain that must be valid."""
    result = validate_chain(blocks, cfg)
    if not result.ok:
        raise CorruptStore(f"chain invalid at {result.bad_index}: {result.reason}")
    state = LedgerState()
    for block in blocks:
        for tx in block.transactions:
            apply_transaction(state, tx)
    return state


class Ledger:
    """A single node's replica: blocks plus incrementally maintained state."""

    def __init__(self, cfg: ElectionConfig, genesis: Block):
        reason = _check_genesis(genesis, cfg)
        if reason is not None or genesis.block_hash != genesis.compute_hash():
            raise CorruptStore("genesis does not match election config")
        self.cfg = cfg
        self.blocks = [genesis]
        self.state = LedgerState()
        for tx in genesis.transactions:
            apply_transaction(self.state, tx)

    @property
    def tip(self) -> Block:
        return self.blocks[-1]

    @property
    def height(self) -> int:
        return self.tip.index

    def append_block(self, block: Block):
        """Extend the chain with a finalized block; applies all its txs."""
        if block.prev_hash != self.tip.block_hash or block.index != self.height + 1:
            raise NonLinking(f"block {block.index} does not extend tip {self.height}")
        if block.block_hash != block.compute_hash():
            raise NonLinking("stored block hash does not recompute")
        if block.timestamp < self.tip.timestamp:
            raise NonLinking("block timestamp precedes parent")
        if not block_is_finalized(block, self.cfg):
            raise NotFinalized(
                f"quorum not met: {count_quorum_signatures(block, self.cfg)}"
                f"/{self.cfg.roster.quorum_threshold}"
            )
        working = self.state.copy()
        for tx in block.transactions:
            reason = verify_transaction(tx, working, self.cfg)
            if reason is not None:
                raise InvalidTx(reason)
            apply_transaction(working, tx)
        self.blocks.append(block)
        self.state = working

    def replace_chain(self, blocks):
        """Adopt a longer canonical chain (fork resolution)."""
        result = validate_chain(blocks, self.cfg)
        if not result.ok:
            raise InvalidTx(f"candidate chain invalid: {result.reason}")
        self.blocks = list(blocks)
        self.state = replay_state(self.blocks, self.cfg)

    def find_transaction(self, tx_hash: bytes):
        """(block, position, tx) for a tx hash, or None."""
        for block in self.blocks:
            for pos, tx in enumerate(block.transactions):
                if tx.tx_hash() == tx_hash:
                    return block, pos, tx
        return None


# --- chain file persistence: length-prefixed canonical block records ---

def append_block_file(path, block: Block):
    record = block.wire_bytes()
    with open(path, "ab") as fh:
        fh.write(U32.pack(len(record)))
        fh.write(record)
        fh.flush()
        os.fsync(fh.fileno())


def write_chain_file(path, blocks):
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        for block in blocks:
            record = block.wire_bytes()
            fh.write(U32.pack(len(record)))
            fh.write(record)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def load_chain_file(path, strict: bool = True):
    """Decode a chain file.

    Returns (blocks, torn_tail_bytes).  In strict mode any anomaly raises
    CorruptStore; in recovery mode a truncated FINAL record is discarded
    (torn write) but anything else still raises.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    blocks = []
    pos = 0
    while pos < len(data):
        remaining = len(data) - pos
        if remaining < 4:
            if strict:
                raise CorruptStore(f"dangling {remaining} bytes at offset {pos}")
            return blocks, remaining
        (length,) = U32.unpack(data[pos:pos + 4])
        if pos + 4 + length > len(data):
            if strict:
                raise CorruptStore(f"truncated record at offset {pos}")
            return blocks, len(data) - pos
        record = data[pos + 4:pos + 4 + length]
        try:
            block = Block.decode(record)
        except DecodeError as exc:
            raise CorruptStore(f"record {len(blocks)} undecodable: {exc}") from exc
        blocks.append(block)
        pos += 4 + length
    return blocks, 0
