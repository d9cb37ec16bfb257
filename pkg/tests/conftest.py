"""Shared election fixtures: deterministic keys, config, and chain helpers."""

import random

import pytest

from ballotchain.config import ElectionConfig, make_election
from ballotchain.core import (
    KIND_MINT,
    KIND_SWEEP,
    KIND_VOTE,
    Block,
    Transaction,
    sign_block_hash,
    sign_transaction,
)
from ballotchain.crypto import KeyPair, hash_bytes
from ballotchain.ledger import Ledger, build_block, make_genesis

START = 10_000
END = 20_000


def seeded_key(tag: str) -> KeyPair:
    return KeyPair.from_seed(hash_bytes(b"test-key:" + tag.encode()))


class ElectionHarness:
    """A complete in-memory election: config, keys, genesis, tx builders."""

    def __init__(
        self,
        candidates=("alice", "bob"),
        num_nodes=5,
        token_amount=1,
        start=START,
        end=END,
        election_id="test-election",
        **overrides,
    ):
        self.authority = seeded_key(f"{election_id}:authority")
        self.node_keys = {
            f"node-{i}": seeded_key(f"{election_id}:node-{i}") for i in range(num_nodes)
        }
        self.cfg = make_election(
            election_id=election_id,
            candidate_names=list(candidates),
            start_time=start,
            end_time=end,
            node_ids=sorted(self.node_keys),
            authority=self.authority,
            node_keys=self.node_keys,
            token_amount=token_amount,
            **overrides,
        )
        self.genesis = make_genesis(self.cfg, self.authority)
        self._voters = {}
        self._authority_nonce = 1  # genesis commitment used nonce 0

    def voter(self, i) -> KeyPair:
        if i not in self._voters:
            self._voters[i] = seeded_key(f"{self.cfg.election_id}:voter-{i}")
        return self._voters[i]

    def ledger(self) -> Ledger:
        return Ledger(self.cfg, self.genesis)

    def candidate_address(self, name: str) -> bytes:
        for cand in self.cfg.candidates:
            if cand.name == name:
                return cand.address
        raise KeyError(name)

    def mint_tx(self, voter: KeyPair, nonce=None, amount=None, timestamp=None):
        tx = Transaction(
            election_id=self.cfg.election_id,
            from_pubkey=self.authority.public_key,
            to_address=voter.address,
            amount=self.cfg.token_amount if amount is None else amount,
            timestamp=START - 100 if timestamp is None else timestamp,
            nonce=self._authority_nonce if nonce is None else nonce,
            kind=KIND_MINT,
        )
        if nonce is None:
            self._authority_nonce += 1
        return sign_transaction(tx, self.authority)

    def vote_tx(self, voter: KeyPair, to_address, amount=None, timestamp=None, nonce=0):
        tx = Transaction(
            election_id=self.cfg.election_id,
            from_pubkey=voter.public_key,
            to_address=to_address,
            amount=self.cfg.token_amount if amount is None else amount,
            timestamp=(START + END) // 2 if timestamp is None else timestamp,
            nonce=nonce,
            kind=KIND_VOTE,
        )
        return sign_transaction(tx, voter)

    def sweep_tx(self, source_address, amount, nonce=None, timestamp=None):
        tx = Transaction(
            election_id=self.cfg.election_id,
            from_pubkey=self.authority.public_key,
            to_address=self.cfg.abstain_address,
            amount=amount,
            timestamp=END + 100 if timestamp is None else timestamp,
            nonce=self._authority_nonce if nonce is None else nonce,
            kind=KIND_SWEEP,
            memo=source_address,
        )
        if nonce is None:
            self._authority_nonce += 1
        return sign_transaction(tx, self.authority)

    def finalize(self, block: Block, signers=None) -> Block:
        """Attach quorum signatures from the given (default: all) nodes."""
        ids = sorted(self.node_keys) if signers is None else signers
        sigs = [
            (node_id, sign_block_hash(block.block_hash, self.node_keys[node_id]))
            for node_id in ids
        ]
        return block.with_signatures(sigs)

    def extend(self, ledger: Ledger, txs, now=None) -> Block:
        """Build, finalize, and append one block holding ``txs``."""
        now = (START + END) // 2 if now is None else now
        block = build_block(ledger.state, self.cfg, ledger.tip, txs, "node-0", now)
        block = self.finalize(block)
        ledger.append_block(block)
        return block

    def cluster(self, behaviors=None, seed=0):
        from ballotchain.consensus import Cluster

        return Cluster(self.cfg, self.node_keys, self.genesis,
                       behaviors=behaviors, seed=seed)


@pytest.fixture
def harness():
    return ElectionHarness()


@pytest.fixture
def rng():
    return random.Random(0xB10C)
