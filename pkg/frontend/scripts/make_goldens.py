"""Regenerate the fixtures under tests/fixtures/.

Run from the repo root with the Python package installed:

    python3 frontend/scripts/make_goldens.py

tx-goldens.json pins the transaction wire format the browser must produce
byte-for-byte; tally-golden.json is a real tally-report.json written by the
CLI over a small seeded election, so UI-rendered numbers can be compared
against CLI output.
"""

import json
import pathlib
import subprocess
import tempfile

from ballotchain.core import KIND_MINT, KIND_SWEEP, KIND_VOTE, Transaction, sign_transaction
from ballotchain.crypto import KeyPair, derive_address, hash_bytes, to_hex
from ballotchain.service import build_service

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def tx_case(label, seed, election_id, to_address, amount, timestamp, nonce,
            kind=KIND_VOTE, memo=b""):
    key = KeyPair.from_seed(seed)
    tx = Transaction(
        election_id=election_id,
        from_pubkey=key.public_key,
        to_address=to_address,
        amount=amount,
        timestamp=timestamp,
        nonce=nonce,
        kind=kind,
        memo=memo,
    )
    signed = sign_transaction(tx, key)
    return {
        "label": label,
        "seed": to_hex(seed),
        "election_id": election_id,
        "to_address": to_hex(to_address),
        "amount": amount,
        "timestamp": timestamp,
        "nonce": nonce,
        "kind": kind,
        "memo": to_hex(memo),
        "public_key": to_hex(key.public_key),
        "address": to_hex(derive_address(key.public_key)),
        "canonical": to_hex(tx.canonical_bytes()),
        "wire": to_hex(signed.wire_bytes()),
        "signature": to_hex(signed.signature),
        "tx_hash": to_hex(signed.tx_hash()),
    }


def make_tx_goldens():
    sink = hash_bytes(b"golden-sink")[:20]
    other = hash_bytes(b"golden-other")[:20]
    cases = [
        tx_case("plain vote", hash_bytes(b"golden-seed-1"), "city-2030",
                sink, 1, 1_900_020_100, 0),
        tx_case("unicode election id", hash_bytes(b"golden-seed-2"),
                "tést-élection", other, 1, 1_900_020_200, 0),
        tx_case("mint grant", hash_bytes(b"golden-seed-3"), "city-2030",
                sink, 1, 1_900_000_500, 7, kind=KIND_MINT),
        tx_case("sweep with memo", hash_bytes(b"golden-seed-4"), "city-2030",
                other, 3, 1_900_030_000, 9, kind=KIND_SWEEP,
                memo=hash_bytes(b"golden-debit")[:20]),
        tx_case("zero amount", hash_bytes(b"golden-seed-5"), "x",
                sink, 0, 0, 0),
        tx_case("large fields", hash_bytes(b"golden-seed-6"), "city-2030",
                sink, 2**53 - 1, 2**40, 2**31),
    ]
    out = FIXTURES / "tx-goldens.json"
    out.write_text(json.dumps(cases, indent=2) + "\n")
    print(f"wrote {out} ({len(cases)} cases)")


def make_tally_golden():
    base = 1_900_000_000
    with tempfile.TemporaryDirectory() as tmp:
        clock = {"now": float(base + 50)}
        service = build_service(
            tmp,
            clock=lambda: clock["now"],
            election_params={
                "election_id": "golden-2030",
                "candidates": ["alice", "bob", "carol"],
                "registration_start": base,
                "registration_end": base + 1_000,
                "start_time": base + 2_000,
                "end_time": base + 3_000,
                "genesis_time": base,
                "seed": 90_210,
                "gov_registry": [
                    {"national_id": f"70000000000{i}",
                     "full_name": f"Golden Voter-{i}",
                     "dob": "1985-06-15",
                     "phone": f"+1415555100{i}"}
                    for i in range(5)
                ],
            },
        )
        votes = {0: "alice", 1: "alice", 2: "bob", 3: None, 4: "abstain"}
        targets = {c.name: c.address for c in service.cfg.candidates}
        targets["abstain"] = service.cfg.abstain_address
        keys = {}
        for i in votes:
            service.register({
                "national_id": f"70000000000{i}",
                "first_name": "Golden",
                "last_name": f"Voter-{i}",
                "email": f"golden{i}@example.org",
                "dob": "1985-06-15",
                "phone": f"+1415555100{i}",
                "voter_card_number": f"GC-{i}",
                "city": "Goldenton",
                "postal_address": f"{i} Golden Way",
            })
            service.otp_issue(f"70000000000{i}")
            code = service.registry.outbox[-1]["body"][-6:]
            token = service.otp_verify(f"70000000000{i}", code)["session_token"]
            keys[i] = KeyPair.from_seed(hash_bytes(f"golden-voter:{i}".encode()))
            service.bind_key(token, to_hex(keys[i].public_key))
        for i, choice in votes.items():
            if choice is None:
                continue
            clock["now"] = float(base + 2_100 + i)
            key = keys[i]
            session = None
            for f in range(service.cfg.min_liveness_frames):
                reply = service.liveness_frame(
                    to_hex(key.public_key) if session is None else None,
                    to_hex(hash_bytes(f"golden-frame:{i}:{f}".encode())),
                    session,
                )
                session = reply["session_id"]
            tx = Transaction(
                election_id=service.cfg.election_id,
                from_pubkey=key.public_key,
                to_address=targets[choice],
                amount=service.cfg.token_amount,
                timestamp=int(clock["now"]),
                nonce=0,
                kind=KIND_VOTE,
            )
            signed = sign_transaction(tx, key)
            service.submit_vote(session, to_hex(signed.wire_bytes()))
        clock["now"] = float(base + 3_500)
        service.close_election()
        subprocess.run(
            ["ballotchain", "tally", "--data-dir", tmp, "--format", "json"],
            check=True, capture_output=True,
        )
        golden = (pathlib.Path(tmp) / "tally-report.json").read_bytes()
    out = FIXTURES / "tally-golden.json"
    out.write_bytes(golden)
    print(f"wrote {out} ({len(golden)} bytes)")


if __name__ == "__main__":
    FIXTURES.mkdir(parents=True, exist_ok=True)
    make_tx_goldens()
    make_tally_golden()
