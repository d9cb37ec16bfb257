"""Multi-node quorum rounds: proposals, finalization, forks, partitions.

The network is simulated in process. Nodes hold real replicas and real keys;
message passing is direct method calls gated by the current partition, so a
round is deterministic given the cluster seed and call order.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .config import ElectionConfig
from .core import Block, Transaction, sign_block_hash, sign_transaction
from .crypto import KeyPair
from .errors import NoCanonicalChain
from .ledger import (
    Ledger,
    apply_transaction,
    block_is_finalized,
    build_block,
    validate_chain,
    verify_transaction,
)

HONEST = "honest"
WITHHOLD = "withhold"            # never signs another node's proposal
INVALID_PROPOSER = "invalid-block"  # proposes forged txs, signs anything
EQUIVOCATE = "equivocate"        # proposes two variants at one height

BEHAVIORS = (HONEST, WITHHOLD, INVALID_PROPOSER, EQUIVOCATE)


@dataclass(frozen=True)
class Stalled:
    """A proposal round that failed to gather a quorum."""

    signature_count: int


class Node:
    """One replica: chain, mempool, and a signing key on the roster."""

    def __init__(self, node_id: str, key: KeyPair, cfg: ElectionConfig,
                 genesis: Block, behavior: str = HONEST):
        if behavior not in BEHAVIORS:
            raise ValueError(f"unknown behavior {behavior!r}")
        self.node_id = node_id
        self.key = key
        self.cfg = cfg
        self.behavior = behavior
        self.ledger = Ledger(cfg, genesis)
        self.mempool: dict[bytes, Transaction] = {}
        self.rejections: list[tuple[bytes, str]] = []
        # one signed hash per height; refusing a second is the safety guard
        self._signed_at: dict[int, bytes] = {}

    @property
    def chain(self) -> list[Block]:
        return self.ledger.blocks

    def overlay_state(self):
        """Tip state with the mempool applied, for admission checks."""
        state = self.ledger.state.copy()
        for tx in self.mempool.values():
            apply_transaction(state, tx)
        return state

    def admit_tx(self, tx: Transaction) -> str | None:
        """None if the tx entered (or was already in) the mempool, else a reason."""
        h = tx.tx_hash()
        if h in self.mempool or self.ledger.find_transaction(h) is not None:
            return None
        reason = verify_transaction(tx, self.overlay_state(), self.cfg)
        if reason is None:
            self.mempool[h] = tx
        else:
            self.rejections.append((h, reason))
        return reason

    def _extends_tip(self, block: Block) -> bool:
        tip = self.ledger.tip
        return block.index == tip.index + 1 and block.prev_hash == tip.block_hash

    def consider_block(self, block: Block) -> bytes | None:
        """Re-verify a proposal and return a finalization signature, or refuse."""
        if self.behavior == WITHHOLD and block.proposer_id != self.node_id:
            return None
        if self.behavior in (INVALID_PROPOSER, EQUIVOCATE):
            return sign_block_hash(block.block_hash, self.key)

        prior = self._signed_at.get(block.index)
        if prior is not None and prior != block.block_hash:
            return None
        if not self._extends_tip(block):
            return None
        if block.block_hash != block.compute_hash():
            return None
        if block.timestamp < self.ledger.tip.timestamp:
            return None
        state = self.ledger.state.copy()
        for tx in block.transactions:
            if verify_transaction(tx, state, self.cfg) is not None:
                return None
            apply_transaction(state, tx)
        self._signed_at[block.index] = block.block_hash
        return sign_block_hash(block.block_hash, self.key)

    def accept_block(self, block: Block) -> bool:
        if not self._extends_tip(block):
            return False
        try:
            self.ledger.append_block(block)
        except Exception:
            return False
        self.refresh_mempool()
        return True

    def refresh_mempool(self):
        """Drop pool entries now on chain or no longer valid at the new tip."""
        pending = list(self.mempool.values())
        self.mempool = {}
        for tx in pending:
            if self.ledger.find_transaction(tx.tx_hash()) is not None:
                continue
            if verify_transaction(tx, self.overlay_state(), self.cfg) is None:
                self.mempool[tx.tx_hash()] = tx

    def adopt_chain(self, blocks: list[Block]) -> bool:
        """Switch to a canonical chain picked by fork resolution."""
        if [b.block_hash for b in blocks] == [b.block_hash for b in self.chain]:
            return False
        self.ledger.replace_chain(blocks)
        self.refresh_mempool()
        return True


def resolve_fork(candidates: list[list[Block]], cfg: ElectionConfig) -> list[Block]:
    """Longest fully finalized valid chain; ties break to the smaller tip hash."""
    valid = []
    for chain in candidates:
        if not chain or not validate_chain(chain, cfg).ok:
            continue
        if not all(block_is_finalized(b, cfg) for b in chain):
            continue
        valid.append(chain)
    if not valid:
        raise NoCanonicalChain()
    return min(valid, key=lambda c: (-len(c), c[-1].block_hash))


class Cluster:
    """All nodes of one election network plus the partition state."""

    def __init__(self, cfg: ElectionConfig, node_keys: dict[str, KeyPair],
                 genesis: Block, behaviors: dict[str, str] | None = None,
                 seed: int = 0):
        behaviors = behaviors or {}
        self.cfg = cfg
        self.nodes: dict[str, Node] = {}
        for node_id in cfg.roster.node_ids():
            self.nodes[node_id] = Node(
                node_id, node_keys[node_id], cfg, genesis,
                behaviors.get(node_id, HONEST),
            )
        self.partition: list[frozenset[str]] | None = None
        self.rng = random.Random(seed)
        self.now = genesis.timestamp

    def node_ids(self) -> list[str]:
        return list(self.cfg.roster.node_ids())

    def component_of(self, node_id: str) -> frozenset[str]:
        if self.partition is None:
            return frozenset(self.node_ids())
        for group in self.partition:
            if node_id in group:
                return group
        return frozenset({node_id})

    def reachable(self, a: str, b: str) -> bool:
        return b in self.component_of(a)

    def split(self, groups):
        groups = [frozenset(g) for g in groups]
        cover = set()
        for g in groups:
            if cover & g:
                raise ValueError("partition groups overlap")
            cover |= g
        if cover != set(self.node_ids()):
            raise ValueError("partition must cover all nodes")
        self.partition = groups

    def heal(self):
        self.partition = None
        return self.sync_all()

    def broadcast_tx(self, origin: str, tx: Transaction):
        """Deliver to every reachable node; returns (accepted_ids, rejections)."""
        accepted, rejections = set(), {}
        for nid in sorted(self.component_of(origin)):
            reason = self.nodes[nid].admit_tx(tx)
            if reason is None:
                accepted.add(nid)
            else:
                rejections[nid] = reason
        return accepted, rejections

    def proposer_for(self, height: int, attempt: int = 0) -> str:
        ids = self.node_ids()
        return ids[(height + attempt) % len(ids)]

    def propose_and_collect(self, attempt: int = 0,
                            proposer_id: str | None = None,
                            now: int | None = None):
        """Run one proposal round; returns the finalized Block or Stalled."""
        if now is None:
            now = self.now
        if proposer_id is None:
            height = max(n.ledger.height for n in self.nodes.values()) + 1
            proposer_id = self.proposer_for(height, attempt)
        proposer = self.nodes[proposer_id]
        component = sorted(self.component_of(proposer_id))

        if proposer.behavior == EQUIVOCATE:
            return self._equivocation_round(proposer, component, now)
        if proposer.behavior == INVALID_PROPOSER:
            block = self._poisoned_block(proposer, now)
        else:
            txs = list(proposer.mempool.values())
            block = build_block(
                proposer.ledger.state, self.cfg, proposer.ledger.tip,
                txs, proposer_id, now,
            )
        return self._collect(block, component)

    def _collect(self, block: Block, component: list[str]):
        signatures = []
        for nid in component:
            sig = self.nodes[nid].consider_block(block)
            if sig is not None:
                signatures.append((nid, sig))
        if len(signatures) < self.cfg.roster.quorum_threshold:
            return Stalled(len(signatures))
        final = block.with_signatures(tuple(signatures))
        for nid in component:
            self.nodes[nid].accept_block(final)
        return final

    def _poisoned_block(self, proposer: Node, now: int) -> Block:
        # forged mint: the proposer key is not the election authority
        bogus = Transaction(
            election_id=self.cfg.election_id,
            from_pubkey=proposer.key.public_key,
            to_address=self.cfg.abstain_address,
            amount=1_000_000,
            timestamp=now,
            nonce=0,
            kind="mint",
        )
        bogus = sign_transaction(bogus, proposer.key)
        tip = proposer.ledger.tip
        block = Block(
            index=tip.index + 1,
            prev_hash=tip.block_hash,
            timestamp=max(now, tip.timestamp),
            transactions=(bogus,),
            proposer_id=proposer.node_id,
        )
        return block.sealed()

    def _equivocation_round(self, proposer: Node, component: list[str], now: int):
        """Send conflicting variants to alternating peers; honest guard holds."""
        tip = proposer.ledger.tip
        state = proposer.ledger.state
        txs = list(proposer.mempool.values())
        variant_a = build_block(state, self.cfg, tip, txs, proposer.node_id, now)
        variant_b = build_block(state, self.cfg, tip, [], proposer.node_id, now + 1)
        votes = {variant_a.block_hash: [], variant_b.block_hash: []}
        for i, nid in enumerate(component):
            block = variant_a if i % 2 == 0 else variant_b
            sig = self.nodes[nid].consider_block(block)
            if sig is not None:
                votes[block.block_hash].append((nid, sig))
        for variant in (variant_a, variant_b):
            got = votes[variant.block_hash]
            if len(got) >= self.cfg.roster.quorum_threshold:
                final = variant.with_signatures(tuple(got))
                for nid in component:
                    self.nodes[nid].accept_block(final)
                return final
        return Stalled(max(len(v) for v in votes.values()))

    def run_height(self, now: int | None = None):
        """Rotate proposers until some attempt finalizes; returns (block, attempts)."""
        attempts = []
        for attempt in range(len(self.node_ids())):
            outcome = self.propose_and_collect(attempt=attempt, now=now)
            attempts.append(outcome)
            if isinstance(outcome, Block):
                return outcome, attempts
        return None, attempts

    def sync_all(self) -> set[str]:
        """Each node adopts the canonical chain among its reachable peers."""
        changed = set()
        for nid in sorted(self.nodes):
            node = self.nodes[nid]
            peers = sorted(self.component_of(nid))
            candidates = [list(self.nodes[p].chain) for p in peers]
            try:
                best = resolve_fork(candidates, self.cfg)
            except NoCanonicalChain:
                continue
            if node.adopt_chain(best):
                changed.add(nid)
        return changed

    def replicas_identical(self, node_ids=None) -> bool:
        ids = sorted(node_ids) if node_ids else sorted(self.nodes)
        tips = {self.nodes[nid].ledger.tip.block_hash for nid in ids}
        heights = {self.nodes[nid].ledger.height for nid in ids}
        return len(tips) == 1 and len(heights) == 1
