"""Counting, sweeps, inclusion proofs, explorer rows, recount agreement."""

import json
import random

import pytest

from ballotchain.crypto import to_hex
from ballotchain.errors import (
    AlreadySwept,
    InvalidChain,
    PageOutOfRange,
    WindowStillOpen,
)
from ballotchain.ledger import validate_chain
from ballotchain.tally import (
    TallyResult,
    explorer_pages,
    recount,
    residual_voter_balances,
    sweep_abstain,
    tally,
    verify_vote,
)

from conftest import END, START, ElectionHarness

MID = (START + END) // 2


def run_election(seed, candidates=("alice", "bob"), voters=20,
                 vote_rate=0.75, sweep=True):
    """Seeded end-to-end election; returns (harness, ledger, choice map)."""
    rng = random.Random(seed)
    harness = ElectionHarness(
        candidates=candidates, election_id=f"tally-{seed}"
    )
    ledger = harness.ledger()
    keys = [harness.voter(i) for i in range(voters)]
    for batch_start in range(0, voters, 7):
        batch = keys[batch_start:batch_start + 7]
        harness.extend(
            ledger, [harness.mint_tx(v) for v in batch], now=START - 50
        )
    choices = {}
    pending = []
    for voter in keys:
        if rng.random() < vote_rate:
            name = rng.choice(list(candidates) + ["abstain"])
            to = (harness.cfg.abstain_address if name == "abstain"
                  else harness.candidate_address(name))
            choices[voter.public_key] = name
            pending.append(harness.vote_tx(voter, to, timestamp=MID))
        if len(pending) >= 5:
            harness.extend(ledger, pending, now=MID)
            pending = []
    if pending:
        harness.extend(ledger, pending, now=MID)
    if sweep:
        txs = sweep_abstain(ledger.state, harness.cfg, harness.authority,
                            now=END + 10)
        if txs:
            harness.extend(ledger, txs, now=END + 10)
    return harness, ledger, choices


class TestTally:
    def test_single_voter_single_vote(self, harness):
        ledger = harness.ledger()
        voter = harness.voter(0)
        harness.extend(ledger, [harness.mint_tx(voter)], now=START - 50)
        harness.extend(
            ledger, [harness.vote_tx(voter, harness.candidate_address("alice"))]
        )
        result = tally(ledger.blocks, harness.cfg)
        assert result.per_candidate == {"alice": 1, "bob": 0}
        assert result.winners == ("alice",)
        assert result.voted_tokens == 1
        assert result.turnout_fraction == 1.0

    def test_tie_returns_full_argmax_set(self):
        harness = ElectionHarness(election_id="tie")
        ledger = harness.ledger()
        votes = []
        for i in range(4):
            voter = harness.voter(i)
            harness.extend(ledger, [harness.mint_tx(voter)], now=START - 50)
            name = "alice" if i < 2 else "bob"
            votes.append(harness.vote_tx(voter, harness.candidate_address(name)))
        harness.extend(ledger, votes)
        result = tally(ledger.blocks, harness.cfg)
        assert result.per_candidate == {"alice": 2, "bob": 2}
        assert result.winners == ("alice", "bob")

    def test_200_voters_match_brute_force_counter(self):
        harness, ledger, choices = run_election(
            909, candidates=("alice", "bob", "chan"), voters=200, sweep=False
        )
        # oracle: count accepted vote txs straight off the raw tx list
        counts = {name: 0 for name in ("alice", "bob", "chan")}
        abstain_votes = 0
        for block in ledger.blocks:
            for tx in block.transactions:
                if tx.kind != "vote":
                    continue
                if tx.to_address == harness.cfg.abstain_address:
                    abstain_votes += tx.amount
                else:
                    counts[harness.cfg.candidate_name(tx.to_address)] += tx.amount
        result = tally(ledger.blocks, harness.cfg)
        assert result.per_candidate == counts
        assert result.abstain_balance == abstain_votes
        assert result.voted_tokens == sum(counts.values()) + abstain_votes
        top = max(counts.values())
        assert set(result.winners) == {n for n, c in counts.items() if c == top}

    def test_tampered_chain_refused(self, harness):
        ledger = harness.ledger()
        harness.extend(ledger, [harness.mint_tx(harness.voter(0))],
                       now=START - 50)
        blocks = list(ledger.blocks)
        forged = blocks[1].with_signatures(())
        with pytest.raises(InvalidChain):
            tally([blocks[0], forged], harness.cfg)

    def test_tally_is_pure_over_reserialized_chain(self):
        from ballotchain.core import Block

        harness, ledger, _ = run_election(411, voters=30)
        rehydrated = [Block.decode(b.wire_bytes()) for b in ledger.blocks]
        assert tally(rehydrated, harness.cfg).to_dict() == \
            tally(ledger.blocks, harness.cfg).to_dict()


class TestSweep:
    def test_ten_granted_seven_voted_three_swept(self):
        harness = ElectionHarness(election_id="sweep-3")
        ledger = harness.ledger()
        voters = [harness.voter(i) for i in range(10)]
        harness.extend(ledger, [harness.mint_tx(v) for v in voters],
                       now=START - 50)
        harness.extend(
            ledger,
            [harness.vote_tx(v, harness.candidate_address("alice"))
             for v in voters[:7]],
        )
        txs = sweep_abstain(ledger.state, harness.cfg, harness.authority,
                            now=END + 5)
        assert len(txs) == 3
        assert [t.memo.hex() for t in txs] == sorted(t.memo.hex() for t in txs)
        harness.extend(ledger, txs, now=END + 5)
        result = tally(ledger.blocks, harness.cfg)
        assert result.abstain_balance == 3
        assert result.swept_tokens == 3
        assert result.unswept_residue == 0
        assert not residual_voter_balances(ledger.state, harness.cfg)

    def test_all_voted_sweeps_nothing(self):
        harness = ElectionHarness(election_id="sweep-0")
        ledger = harness.ledger()
        for i in range(4):
            voter = harness.voter(i)
            harness.extend(ledger, [harness.mint_tx(voter)], now=START - 50)
            harness.extend(
                ledger, [harness.vote_tx(voter, harness.candidate_address("bob"))]
            )
        assert sweep_abstain(ledger.state, harness.cfg, harness.authority,
                             now=END + 5) == []

    def test_sweep_before_close_refused(self, harness):
        ledger = harness.ledger()
        harness.extend(ledger, [harness.mint_tx(harness.voter(0))],
                       now=START - 50)
        with pytest.raises(WindowStillOpen):
            sweep_abstain(ledger.state, harness.cfg, harness.authority, now=END)

    def test_second_sweep_refused(self):
        harness = ElectionHarness(election_id="sweep-twice")
        ledger = harness.ledger()
        harness.extend(ledger, [harness.mint_tx(harness.voter(0))],
                       now=START - 50)
        txs = sweep_abstain(ledger.state, harness.cfg, harness.authority,
                            now=END + 5)
        harness.extend(ledger, txs, now=END + 5)
        with pytest.raises(AlreadySwept):
            sweep_abstain(ledger.state, harness.cfg, harness.authority,
                          now=END + 6)

    def test_conservation_over_50_seeded_elections(self):
        for seed in range(50):
            harness, ledger, _ = run_election(
                3000 + seed,
                voters=random.Random(seed).randrange(3, 25),
                vote_rate=random.Random(seed ^ 1).random(),
            )
            result = tally(ledger.blocks, harness.cfg)
            counted = sum(result.per_candidate.values()) + result.abstain_balance
            assert counted == result.total_minted, f"seed {seed}"
            assert result.unswept_residue == 0, f"seed {seed}"
            assert validate_chain(ledger.blocks, harness.cfg).ok


class TestVerifyVote:
    def test_voter_key_resolves_to_canonical_block(self):
        harness, ledger, choices = run_election(88, voters=12)
        voted = next(iter(choices))
        record = verify_vote(voted, ledger.blocks)
        assert record is not None
        block = ledger.blocks[record.block_index]
        assert block.block_hash == record.block_hash
        tx = block.transactions[record.position]
        assert tx.from_pubkey == voted
        assert tx.tx_hash() == record.tx_hash

    def test_nonvoter_key_not_found(self, harness):
        ledger = harness.ledger()
        voter = harness.voter(0)
        harness.extend(ledger, [harness.mint_tx(voter)], now=START - 50)
        assert verify_vote(voter.public_key, ledger.blocks) is None

    def test_agrees_with_linear_scan_oracle_for_200_voters(self):
        harness, ledger, choices = run_election(512, voters=200)
        for i in range(200):
            key = harness.voter(i).public_key
            # oracle: flat scan of every tx in order
            expected = None
            for block in ledger.blocks:
                for pos, tx in enumerate(block.transactions):
                    if tx.kind == "vote" and tx.from_pubkey == key \
                            and expected is None:
                        expected = (block.index, pos)
            record = verify_vote(key, ledger.blocks)
            if expected is None:
                assert record is None
            else:
                assert (record.block_index, record.position) == expected


class TestExplorerPages:
    def chain_of(self, n_blocks):
        harness = ElectionHarness(election_id=f"pages-{n_blocks}")
        ledger = harness.ledger()
        for i in range(n_blocks - 1):
            harness.extend(ledger, [harness.mint_tx(harness.voter(i))],
                           now=START - 200 + i)
        return harness, ledger

    def test_26_blocks_on_one_page(self):
        harness, ledger = self.chain_of(26)
        page = explorer_pages(ledger.blocks, page=1, page_size=100)
        assert page["shown"] == 26
        assert page["total_blocks"] == 26
        assert page["rows"][0]["block_hash"] == to_hex(ledger.tip.block_hash)
        assert page["rows"][-1]["block_hash"] == to_hex(
            ledger.blocks[0].block_hash
        )

    def test_row_schema_exact(self):
        harness, ledger = self.chain_of(3)
        row = explorer_pages(ledger.blocks, 1, 10)["rows"][0]
        assert list(row) == [
            "previous_hash", "block_hash", "size_kb", "time", "timestamp",
        ]
        assert row["time"].endswith("Z")
        assert isinstance(row["timestamp"], int)

    def test_genesis_row_has_zero_previous_hash(self):
        harness, ledger = self.chain_of(2)
        page = explorer_pages(ledger.blocks, 1, 10)
        assert page["rows"][-1]["previous_hash"] == "0" * 64

    def test_pagination_and_out_of_range(self):
        harness, ledger = self.chain_of(10)
        first = explorer_pages(ledger.blocks, 1, 4)
        second = explorer_pages(ledger.blocks, 2, 4)
        third = explorer_pages(ledger.blocks, 3, 4)
        assert first["pages"] == 3
        assert [p["shown"] for p in (first, second, third)] == [4, 4, 2]
        hashes = [r["block_hash"] for p in (first, second, third)
                  for r in p["rows"]]
        assert hashes == [to_hex(b.block_hash)
                          for b in reversed(ledger.blocks)]
        with pytest.raises(PageOutOfRange):
            explorer_pages(ledger.blocks, 4, 4)
        with pytest.raises(PageOutOfRange):
            explorer_pages(ledger.blocks, 0, 4)


class TestRecount:
    def test_honest_election_has_clean_report(self):
        harness, ledger, choices = run_election(77, voters=50, sweep=True)
        registered = [harness.voter(i).public_key for i in range(50)]
        report = recount(ledger.blocks, registered, harness.cfg)
        assert report.unregistered_keys == ()
        assert all(count <= 1 for count in report.per_key_vote_count.values())
        assert report.accepted == len(choices)
        assert report.registered_nonvoters == 50 - len(choices)

    def test_injected_stranger_key_is_flagged(self, harness):
        ledger = harness.ledger()
        voter = harness.voter(0)
        stranger = harness.voter(999)
        harness.extend(
            ledger,
            [harness.mint_tx(voter), harness.mint_tx(stranger)],
            now=START - 50,
        )
        harness.extend(ledger, [
            harness.vote_tx(voter, harness.candidate_address("alice")),
            harness.vote_tx(stranger, harness.candidate_address("bob")),
        ])
        report = recount(ledger.blocks, [voter.public_key], harness.cfg)
        assert report.unregistered_keys == (to_hex(stranger.public_key),)

    def test_recount_matches_tally_on_50_seeded_elections(self):
        for seed in range(50):
            harness, ledger, choices = run_election(
                7000 + seed,
                voters=random.Random(seed).randrange(2, 15),
            )
            registered = list(choices)
            report = recount(ledger.blocks, registered, harness.cfg)
            result = tally(ledger.blocks, harness.cfg)
            assert report.accepted == result.voted_tokens, f"seed {seed}"

    def test_rejection_log_rolls_into_report(self, harness):
        ledger = harness.ledger()
        report = recount(ledger.blocks, [], harness.cfg,
                         rejection_log=["DoubleVote", "DoubleVote",
                                        (b"xx", "BadNonce")])
        assert report.rejected_by_reason == {"DoubleVote": 2, "BadNonce": 1}
        assert report.total_vote_txs == 3

    def test_report_serializes_stably(self):
        harness, ledger, choices = run_election(31, voters=8)
        registered = [harness.voter(i).public_key for i in range(8)]
        report = recount(ledger.blocks, registered, harness.cfg)
        first = json.dumps(report.to_dict(), sort_keys=True)
        second = json.dumps(
            recount(ledger.blocks, registered, harness.cfg).to_dict(),
            sort_keys=True,
        )
        assert first == second
