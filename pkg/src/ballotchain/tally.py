"""Counting, abstain sweep, vote verification, explorer rows, and recount.

Everything here is a pure read over the chain except sweep_abstain, which
returns transactions for the ordinary ledger path to apply.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass

from .config import ElectionConfig
from .core import Transaction, sign_transaction
from .crypto import KeyPair, to_hex
from .errors import AlreadySwept, InvalidChain, PageOutOfRange, WindowStillOpen
from .ledger import LedgerState, replay_state, validate_chain


@dataclass(frozen=True)
class TallyResult:
    per_candidate: dict
    abstain_balance: int
    total_minted: int
    voted_tokens: int
    swept_tokens: int
    winners: tuple

    @property
    def unswept_residue(self) -> int:
        counted = sum(self.per_candidate.values()) + self.abstain_balance
        return self.total_minted - counted

    @property
    def turnout_fraction(self) -> float:
        if self.total_minted == 0:
            return 0.0
        return self.voted_tokens / self.total_minted

    def to_dict(self) -> dict:
        return {
            "per_candidate": dict(sorted(self.per_candidate.items())),
            "abstain_balance": self.abstain_balance,
            "total_minted": self.total_minted,
            "voted_tokens": self.voted_tokens,
            "swept_tokens": self.swept_tokens,
            "unswept_residue": self.unswept_residue,
            "turnout_fraction": self.turnout_fraction,
            "winners": list(self.winners),
        }


@dataclass(frozen=True)
class InclusionRecord:
    tx_hash: bytes
    block_index: int
    block_hash: bytes
    position: int
    timestamp: int

    def to_dict(self) -> dict:
        return {
            "tx_hash": to_hex(self.tx_hash),
            "block_index": self.block_index,
            "block_hash": to_hex(self.block_hash),
            "position": self.position,
            "timestamp": self.timestamp,
        }


@dataclass(frozen=True)
class AuditReport:
    total_vote_txs: int
    accepted: int
    rejected_by_reason: dict
    per_key_vote_count: dict
    unregistered_keys: tuple
    registered_nonvoters: int

    def to_dict(self) -> dict:
        return {
            "total_vote_txs": self.total_vote_txs,
            "accepted": self.accepted,
            "rejected_by_reason": dict(sorted(self.rejected_by_reason.items())),
            "per_key_vote_count": dict(sorted(self.per_key_vote_count.items())),
            "unregistered_keys": sorted(self.unregistered_keys),
            "registered_nonvoters": self.registered_nonvoters,
        }


def _checked_state(blocks, cfg: ElectionConfig) -> LedgerState:
    result = validate_chain(blocks, cfg)
    if not result.ok:
        raise InvalidChain(f"block {result.bad_index}: {result.reason}")
    return replay_state(blocks, cfg)


def tally(blocks, cfg: ElectionConfig) -> TallyResult:
    """Count by replaying the chain; winners are the argmax balance set."""
    state = _checked_state(blocks, cfg)
    per_candidate = {
        c.name: state.balance(c.address) for c in cfg.candidates
    }
    top = max(per_candidate.values(), default=0)
    winners = tuple(sorted(
        name for name, count in per_candidate.items() if count == top
    ))
    swept = sum(
        tx.amount
        for block in blocks for tx in block.transactions
        if tx.kind == "sweep"
    )
    return TallyResult(
        per_candidate=per_candidate,
        abstain_balance=state.balance(cfg.abstain_address),
        total_minted=state.total_minted,
        voted_tokens=state.voted_tokens,
        swept_tokens=swept,
        winners=winners,
    )


def residual_voter_balances(state: LedgerState, cfg: ElectionConfig):
    """(address, balance) pairs still sitting on voter addresses."""
    sinks = set(cfg.vote_targets)
    return [
        (address, balance)
        for address, balance in state.balances.items()
        if balance > 0 and address not in sinks
    ]


def sweep_abstain(state: LedgerState, cfg: ElectionConfig,
                  authority: KeyPair, now: int) -> list[Transaction]:
    """Move every unspent voter balance to the abstain sink after close."""
    if now <= cfg.end_time:
        raise WindowStillOpen(f"voting open until {cfg.end_time}")
    residuals = residual_voter_balances(state, cfg)
    if not residuals:
        if state.sweeps_applied > 0:
            raise AlreadySwept("all residual balances already moved")
        return []
    residuals.sort(key=lambda pair: pair[0].hex())
    nonce = state.nonce(authority.address)
    txs = []
    for i, (address, balance) in enumerate(residuals):
        tx = Transaction(
            election_id=cfg.election_id,
            from_pubkey=authority.public_key,
            to_address=cfg.abstain_address,
            amount=balance,
            timestamp=now,
            nonce=nonce + i,
            kind="sweep",
            memo=address,
        )
        txs.append(sign_transaction(tx, authority))
    return txs


def verify_vote(public_key: bytes, blocks) -> InclusionRecord | None:
    """Inclusion record for the ballot cast by a key, or None."""
    for block in blocks:
        for position, tx in enumerate(block.transactions):
            if tx.kind == "vote" and tx.from_pubkey == public_key:
                return InclusionRecord(
                    tx_hash=tx.tx_hash(),
                    block_index=block.index,
                    block_hash=block.block_hash,
                    position=position,
                    timestamp=tx.timestamp,
                )
    return None


def _utc(timestamp: int) -> str:
    moment = dt.datetime.fromtimestamp(timestamp, dt.timezone.utc)
    return moment.isoformat().replace("+00:00", "Z")


def explorer_pages(blocks, page: int, page_size: int) -> dict:
    """One page of block rows, newest first, with 'page N of M' counts."""
    if page_size < 1 or page < 1:
        raise PageOutOfRange(f"page {page} size {page_size}")
    total = len(blocks)
    pages = max(1, -(-total // page_size))
    if page > pages:
        raise PageOutOfRange(f"page {page} of {pages}")
    newest_first = list(reversed(blocks))
    window = newest_first[(page - 1) * page_size: page * page_size]
    rows = [
        {
            "previous_hash": to_hex(block.prev_hash),
            "block_hash": to_hex(block.block_hash),
            "size_kb": block.size_kb,
            "time": _utc(block.timestamp),
            "timestamp": block.timestamp,
        }
        for block in window
    ]
    return {
        "rows": rows,
        "page": page,
        "pages": pages,
        "total_blocks": total,
        "shown": len(rows),
    }


def recount(blocks, key_binding_publics, cfg: ElectionConfig,
            rejection_log=()) -> AuditReport:
    """Full traversal cross-checked against the registry's key export."""
    _checked_state(blocks, cfg)
    registered = {to_hex(k) if isinstance(k, bytes) else k
                  for k in key_binding_publics}
    per_key: dict[str, int] = {}
    for block in blocks:
        for tx in block.transactions:
            if tx.kind != "vote":
                continue
            key_hex = to_hex(tx.from_pubkey)
            per_key[key_hex] = per_key.get(key_hex, 0) + 1
    unregistered = tuple(sorted(k for k in per_key if k not in registered))
    rejected: dict[str, int] = {}
    for entry in rejection_log:
        reason = entry if isinstance(entry, str) else entry[-1]
        rejected[reason] = rejected.get(reason, 0) + 1
    accepted = sum(per_key.values())
    voters = sum(1 for k in per_key if k in registered)
    return AuditReport(
        total_vote_txs=accepted + sum(rejected.values()),
        accepted=accepted,
        rejected_by_reason=rejected,
        per_key_vote_count=per_key,
        unregistered_keys=unregistered,
        registered_nonvoters=len(registered) - voters,
    )
