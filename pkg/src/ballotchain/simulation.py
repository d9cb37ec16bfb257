"""Scripted network runs: seeded scenarios in, line-delimited traces out.

A scenario is pure data (loadable from JSON), so a run is a deterministic
function of it: same scenario bytes, same trace bytes. That is what makes
partition, convergence, and compromise claims checkable by diff.
"""

from __future__ import annotations

import dataclasses
import json
import random
from dataclasses import dataclass, field

from .config import make_election
from .consensus import BEHAVIORS, HONEST, Cluster, Stalled
from .core import Transaction, sign_transaction
from .crypto import KeyPair, hash_bytes, to_hex
from .ledger import make_genesis, validate_chain

SIM_END_TIME = 10**9  # voting window stays open for the whole virtual run


def _sim_key(seed: int, label: str) -> KeyPair:
    return KeyPair.from_seed(hash_bytes(f"sim:{seed}:{label}".encode()))


@dataclass(frozen=True)
class SimScenario:
    seed: int
    num_nodes: int = 5
    candidates: tuple[str, ...] = ("alice", "bob")
    duration: int = 20
    # (time, groups) where groups is a list of node-id lists, or "heal"
    partition_schedule: tuple = ()
    # (time, action dict); actions: mint/vote/tamper
    events: tuple = ()
    byzantine: dict = field(default_factory=dict)

    def __post_init__(self):
        ids = {f"node-{i}" for i in range(self.num_nodes)}
        for when, groups in self.partition_schedule:
            if groups == "heal":
                continue
            members = [m for g in groups for m in g]
            if set(members) != ids or len(members) != len(set(members)):
                raise ValueError("partition groups must cover every node once")
        for series in (self.partition_schedule, self.events):
            times = [when for when, _ in series]
            if times != sorted(times):
                raise ValueError("schedule times must be non-decreasing")
        for node_id, behavior in self.byzantine.items():
            if node_id not in ids or behavior not in BEHAVIORS:
                raise ValueError(f"bad byzantine entry {node_id}:{behavior}")

    @classmethod
    def from_dict(cls, raw: dict) -> "SimScenario":
        return cls(
            seed=int(raw["seed"]),
            num_nodes=int(raw.get("num_nodes", 5)),
            candidates=tuple(raw.get("candidates", ("alice", "bob"))),
            duration=int(raw.get("duration", 20)),
            partition_schedule=tuple(
                (int(t), g if g == "heal" else [list(part) for part in g])
                for t, g in raw.get("partition_schedule", ())
            ),
            events=tuple((int(t), dict(e)) for t, e in raw.get("events", ())),
            byzantine=dict(raw.get("byzantine", {})),
        )

    @classmethod
    def load(cls, path) -> "SimScenario":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class SimTrace:
    events: list = field(default_factory=list)

    def add(self, t, event, **fields):
        self.events.append({"t": t, "event": event, **fields})

    def lines(self) -> list[str]:
        return [
            json.dumps(e, sort_keys=True, separators=(",", ":"))
            for e in self.events
        ]

    def to_jsonl(self) -> str:
        return "\n".join(self.lines()) + "\n"

    def write(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_jsonl())

    @property
    def summary(self) -> dict:
        return self.events[-1]


class _SimRun:
    def __init__(self, scenario: SimScenario):
        self.scenario = scenario
        self.authority = _sim_key(scenario.seed, "authority")
        node_keys = {
            f"node-{i}": _sim_key(scenario.seed, f"node-{i}")
            for i in range(scenario.num_nodes)
        }
        self.cfg = make_election(
            election_id=f"sim-{scenario.seed}",
            candidate_names=list(scenario.candidates),
            start_time=0,
            end_time=SIM_END_TIME,
            node_ids=sorted(node_keys),
            authority=self.authority,
            node_keys=node_keys,
            genesis_time=0,
        )
        genesis = make_genesis(self.cfg, self.authority)
        self.cluster = Cluster(
            self.cfg, node_keys, genesis, behaviors=scenario.byzantine,
            seed=scenario.seed,
        )
        self.trace = SimTrace()
        self.mint_nonce = 1
        self.attempts: dict[frozenset, int] = {}
        self._voter_cache: dict[int, KeyPair] = {}
        self.rng = random.Random(scenario.seed)

    def voter(self, i: int) -> KeyPair:
        if i not in self._voter_cache:
            self._voter_cache[i] = _sim_key(self.scenario.seed, f"voter-{i}")
        return self._voter_cache[i]

    def components(self):
        cluster = self.cluster
        if cluster.partition is None:
            return [frozenset(cluster.node_ids())]
        return sorted(cluster.partition, key=lambda g: sorted(g))

    # -- schedule handlers -------------------------------------------------

    def apply_partition_change(self, t, groups):
        if groups == "heal":
            changed = self.cluster.heal()
            self.trace.add(t, "heal", changed=sorted(changed))
            for nid in sorted(changed):
                node = self.cluster.nodes[nid]
                self.trace.add(t, "adopt", node=nid,
                               height=node.ledger.height,
                               tip=to_hex(node.ledger.tip.block_hash))
        else:
            self.cluster.split(groups)
            self.trace.add(t, "partition",
                           groups=[sorted(g) for g in self.components()])
        self.attempts = {}

    def apply_event(self, t, action: dict):
        kind = action["action"]
        if kind == "mint":
            voter = self.voter(int(action["voter"]))
            tx = Transaction(
                election_id=self.cfg.election_id,
                from_pubkey=self.authority.public_key,
                to_address=voter.address,
                amount=1,
                timestamp=t,
                nonce=self.mint_nonce,
                kind="mint",
            )
            self.mint_nonce += 1
            self._broadcast(t, action.get("origin", "node-0"),
                            sign_transaction(tx, self.authority))
        elif kind == "vote":
            voter = self.voter(int(action["voter"]))
            choice = action.get("candidate")
            to = (self.cfg.abstain_address if choice in (None, "abstain")
                  else {c.name: c.address for c in self.cfg.candidates}[choice])
            tx = Transaction(
                election_id=self.cfg.election_id,
                from_pubkey=voter.public_key,
                to_address=to,
                amount=1,
                timestamp=t,
                nonce=0,
                kind="vote",
            )
            self._broadcast(t, action.get("origin", "node-0"),
                            sign_transaction(tx, voter))
        elif kind == "tamper":
            self._tamper(t, action["node"], int(action.get("height", 1)))
        else:
            raise ValueError(f"unknown scenario action {kind!r}")

    def _broadcast(self, t, origin, tx):
        accepted, rejections = self.cluster.broadcast_tx(origin, tx)
        self.trace.add(
            t, "broadcast",
            kind=tx.kind,
            tx=to_hex(tx.tx_hash())[:16],
            origin=origin,
            accepted=sorted(accepted),
            rejected={nid: reason for nid, reason in sorted(rejections.items())},
        )

    def _tamper(self, t, node_id: str, height: int):
        """Locally rewrite one historical block: flip a vote amount, reseal."""
        node = self.cluster.nodes[node_id]
        if height > node.ledger.height:
            height = node.ledger.height
        victim = node.ledger.blocks[height]
        if victim.transactions:
            txs = list(victim.transactions)
            txs[0] = dataclasses.replace(txs[0], amount=txs[0].amount + 1)
            doctored = dataclasses.replace(victim, transactions=tuple(txs))
        else:
            doctored = dataclasses.replace(victim, timestamp=victim.timestamp + 1)
        node.ledger.blocks[height] = doctored.sealed()
        self.trace.add(t, "tamper", node=node_id, height=height)
        result = validate_chain(node.ledger.blocks, self.cfg)
        self.trace.add(t, "cross-validation", node=node_id,
                       ok=bool(result.ok), reason=result.reason,
                       bad_index=result.bad_index)
        for other in sorted(self.cluster.nodes):
            if other == node_id:
                continue
            ok = bool(validate_chain(self.cluster.nodes[other].ledger.blocks,
                                     self.cfg).ok)
            if not ok:
                self.trace.add(t, "cross-validation", node=other, ok=False)
        repaired = self.cluster.sync_all()
        for nid in sorted(repaired):
            peer = self.cluster.nodes[nid]
            self.trace.add(t, "adopt", node=nid, height=peer.ledger.height,
                           tip=to_hex(peer.ledger.tip.block_hash))

    # -- round engine ------------------------------------------------------

    def run_rounds(self, t):
        cluster = self.cluster
        n = len(cluster.node_ids())
        ids = cluster.node_ids()
        for component in self.components():
            height = max(cluster.nodes[m].ledger.height for m in component) + 1
            attempt = self.attempts.get(component, 0)
            proposer = ids[(height + attempt) % n]
            if proposer not in component:
                self.trace.add(t, "no-proposer", height=height,
                               component=sorted(component))
                self.attempts[component] = attempt + 1
                continue
            outcome = cluster.propose_and_collect(proposer_id=proposer, now=t)
            if isinstance(outcome, Stalled):
                self.trace.add(t, "stalled", height=height, proposer=proposer,
                               signatures=outcome.signature_count)
                self.attempts[component] = attempt + 1
            else:
                self.trace.add(
                    t, "finalized", height=outcome.index,
                    hash=to_hex(outcome.block_hash), proposer=proposer,
                    signatures=len(outcome.quorum_signatures),
                    txs=len(outcome.transactions),
                )
                self.attempts[component] = 0

    def finish(self, t):
        if self.cluster.partition is not None:
            self.apply_partition_change(t, "heal")
            self.run_rounds(t)
        replicas = {}
        for nid in sorted(self.cluster.nodes):
            node = self.cluster.nodes[nid]
            chain_bytes = b"".join(b.wire_bytes() for b in node.ledger.blocks)
            replicas[nid] = {
                "height": node.ledger.height,
                "tip": to_hex(node.ledger.tip.block_hash),
                "digest": to_hex(hash_bytes(chain_bytes)),
                "valid": bool(validate_chain(node.ledger.blocks, self.cfg).ok),
            }
        honest = [nid for nid in sorted(self.cluster.nodes)
                  if self.scenario.byzantine.get(nid, HONEST) == HONEST]
        converged = len({replicas[nid]["digest"] for nid in honest}) == 1
        self.trace.events.append({
            "event": "summary", "t": t,
            "replicas": replicas, "converged": converged,
        })

    def run(self) -> SimTrace:
        partition_queue = list(self.scenario.partition_schedule)
        event_queue = list(self.scenario.events)
        for t in range(self.scenario.duration + 1):
            while partition_queue and partition_queue[0][0] <= t:
                _, groups = partition_queue.pop(0)
                self.apply_partition_change(t, groups)
            while event_queue and event_queue[0][0] <= t:
                _, action = event_queue.pop(0)
                self.apply_event(t, action)
            self.run_rounds(t)
        self.finish(self.scenario.duration + 1)
        return self.trace


def run_simulation(scenario: SimScenario):
    """Execute a scenario; returns (trace, final cluster) for inspection."""
    run = _SimRun(scenario)
    trace = run.run()
    return trace, run.cluster


def make_random_scenario(seed: int, num_nodes: int = 5, voters: int = 12,
                         duration: int = 24) -> SimScenario:
    """Mint/vote traffic with one mid-run partition that always heals."""
    rng = random.Random(seed)
    ids = [f"node-{i}" for i in range(num_nodes)]
    events = []
    for v in range(voters):
        events.append((rng.randrange(0, duration // 2),
                       {"action": "mint", "voter": v,
                        "origin": rng.choice(ids)}))
    for v in range(voters):
        if rng.random() < 0.8:
            choice = rng.choice(["alice", "bob", "abstain"])
            events.append((rng.randrange(duration // 2, duration - 4),
                           {"action": "vote", "voter": v, "candidate": choice,
                            "origin": rng.choice(ids)}))
    events.sort(key=lambda pair: pair[0])
    partition_schedule = []
    if rng.random() < 0.7 and num_nodes >= 3:
        cut = rng.randrange(1, num_nodes // 2 + 1)
        members = ids[:]
        rng.shuffle(members)
        start = rng.randrange(2, max(3, duration // 2))
        stop = rng.randrange(start + 2, duration - 2)
        partition_schedule = [
            (start, [members[:cut], members[cut:]]),
            (stop, "heal"),
        ]
    return SimScenario(
        seed=seed, num_nodes=num_nodes, duration=duration,
        partition_schedule=tuple(partition_schedule), events=tuple(events),
    )
