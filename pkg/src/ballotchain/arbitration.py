"""Election-day server: authenticates voters, records liveness, forwards votes.

This server never touches a secret key. The voter's device signs the ballot;
this side only checks presence, window, and grant status, then forwards the
signed transaction to a node and reports the node's verdict verbatim.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .config import ElectionConfig
from .consensus import Cluster
from .core import Transaction
from .crypto import hash_bytes, to_hex
from .errors import (
    AlreadyVoted,
    CorruptStore,
    EmptyFrame,
    InsufficientLiveness,
    NotGranted,
    NotRegistered,
    SessionNotOpen,
    TxRejected,
    WindowClosed,
)
from .registry import TOKEN_GRANTED, Registry

OPEN = "Open"
VOTE_SUBMITTED = "VoteSubmitted"
CLOSED = "Closed"


def accept_nonempty(frame: bytes) -> bool:
    """Default presence verifier: any non-empty frame counts as live."""
    return len(frame) > 0


@dataclass(frozen=True)
class LivenessReceipt:
    frame_hash: bytes
    chain_value: bytes
    t: int
    verdict: bool


@dataclass
class VotingSession:
    session_id: str
    national_id: str  # private reference, never serialized outward
    public_key: bytes
    started_at: int
    receipts: list[LivenessReceipt] = field(default_factory=list)
    state: str = OPEN
    tx_hash: bytes | None = None

    @property
    def anchor(self) -> bytes:
        return hash_bytes(b"liveness:" + self.session_id.encode())


def verify_receipt_chain(session: VotingSession) -> int | None:
    """Index of the first receipt whose chain value fails, else None."""
    prev = session.anchor
    last_t = None
    for i, receipt in enumerate(session.receipts):
        if receipt.chain_value != hash_bytes(prev + receipt.frame_hash):
            return i
        if last_t is not None and receipt.t < last_t:
            return i
        prev = receipt.chain_value
        last_t = receipt.t
    return None


class Arbiter:
    """Session manager bound to one registry and one forwarding node."""

    def __init__(self, cfg: ElectionConfig, registry: Registry,
                 cluster: Cluster, origin: str = "node-0",
                 liveness_verifier=accept_nonempty):
        self.cfg = cfg
        self.registry = registry
        self.cluster = cluster
        self.origin = origin
        self.liveness_verifier = liveness_verifier
        self.sessions: dict[str, VotingSession] = {}
        self._session_seq = 0
        self.forward_log: list[dict] = []

    @property
    def _node(self):
        return self.cluster.nodes[self.origin]

    def _spent(self, public_key: bytes) -> bool:
        return public_key in self._node.overlay_state().spent_keys

    def authenticate_voter(self, public_key: bytes, first_frame: bytes,
                           now: int) -> VotingSession:
        status = self.registry.key_status(public_key)
        if status is None:
            raise NotRegistered("key not bound to any voter")
        if status != TOKEN_GRANTED:
            raise NotGranted(f"voter status is {status}")
        if not self.cfg.start_time <= now <= self.cfg.end_time:
            raise WindowClosed(f"{now} outside voting window")
        if self._spent(public_key):
            raise AlreadyVoted("ballot already cast with this key")
        national_id = self.registry.key_owner[public_key]
        for other in self.sessions.values():
            if (other.national_id == national_id
                    and other.state == VOTE_SUBMITTED):
                raise AlreadyVoted("a submitted session already exists")
        self._session_seq += 1
        session = VotingSession(
            session_id=f"vs-{self._session_seq:06d}",
            national_id=national_id,
            public_key=public_key,
            started_at=now,
        )
        self.sessions[session.session_id] = session
        self._append_receipt(session, first_frame, now)
        return session

    def _append_receipt(self, session: VotingSession, frame: bytes,
                        now: int) -> LivenessReceipt:
        if not frame:
            raise EmptyFrame("liveness frame is empty")
        frame_hash = hash_bytes(frame)
        prev = session.receipts[-1].chain_value if session.receipts \
            else session.anchor
        receipt = LivenessReceipt(
            frame_hash=frame_hash,
            chain_value=hash_bytes(prev + frame_hash),
            t=now,
            verdict=bool(self.liveness_verifier(frame)),
        )
        session.receipts.append(receipt)
        return receipt

    def record_liveness_frame(self, session_id: str, frame: bytes,
                              now: int) -> LivenessReceipt:
        session = self.sessions.get(session_id)
        if session is None or session.state != OPEN:
            raise SessionNotOpen(session_id)
        return self._append_receipt(session, frame, now)

    def submit_vote(self, session_id: str, tx: Transaction) -> str:
        """Forward a device-signed ballot; returns the tx hash as hex."""
        session = self.sessions.get(session_id)
        if session is None or session.state != OPEN:
            raise SessionNotOpen(session_id)
        live = [r for r in session.receipts if r.verdict]
        if len(live) < self.cfg.min_liveness_frames:
            raise InsufficientLiveness(
                f"{len(live)} live frames < {self.cfg.min_liveness_frames}"
            )
        if tx.from_pubkey != session.public_key:
            raise TxRejected("BadSignature")
        accepted, rejections = self.cluster.broadcast_tx(self.origin, tx)
        tx_id = to_hex(tx.tx_hash())
        if self.origin not in accepted:
            reason = rejections.get(self.origin, "BadSignature")
            self.forward_log.append({"tx": tx_id, "outcome": reason})
            raise TxRejected(reason)
        self.forward_log.append({"tx": tx_id, "outcome": "accepted"})
        session.state = VOTE_SUBMITTED
        session.tx_hash = tx.tx_hash()
        return tx_id

    def close_session(self, session_id: str) -> VotingSession:
        session = self.sessions.get(session_id)
        if session is None:
            raise SessionNotOpen(session_id)
        bad = verify_receipt_chain(session)
        if bad is not None:
            raise CorruptStore(
                f"receipt chain broken at index {bad}; session kept open"
            )
        session.state = CLOSED
        return session
