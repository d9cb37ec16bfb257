"""Election configuration: candidates, voting window, token amount, roster.

The public portion is what clients need to build ballots; secret key
material (authority and node signing keys) lives in a separate file and
never leaves the server side.
"""

import json
from dataclasses import dataclass, field

from . import codec
from .crypto import (
    ADDRESS_SIZE,
    PUBKEY_SIZE,
    KeyPair,
    from_hex,
    hash_bytes,
    tagged_address,
    to_hex,
)

DEFAULT_TOKEN_AMOUNT = 1
DEFAULT_MIN_LIVENESS_FRAMES = 3
DEFAULT_ELIGIBILITY_AGE = 18
DEFAULT_OTP_TTL = 300
DEFAULT_OTP_ATTEMPTS = 3


@dataclass(frozen=True)
class Candidate:
    name: str
    address: bytes

    def __post_init__(self):
        if len(self.address) != ADDRESS_SIZE:
            raise ValueError("candidate address must be 20 bytes")


@dataclass(frozen=True)
class NodeRoster:
    """Ordered list of (node_id, node_public_key); majority quorum."""

    nodes: tuple  # of (node_id, public_key bytes)

    def __post_init__(self):
        ids = [node_id for node_id, _ in self.nodes]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate node ids in roster")
        for _, key in self.nodes:
            if len(key) != PUBKEY_SIZE:
                raise ValueError("node public key must be 32 bytes")

    def __len__(self):
        return len(self.nodes)

    @property
    def quorum_threshold(self) -> int:
        # floor(n/2) + 1: strictly more than half of the roster
        return len(self.nodes) // 2 + 1

    def node_ids(self):
        return [node_id for node_id, _ in self.nodes]

    def public_key(self, node_id: str) -> bytes:
        for nid, key in self.nodes:
            if nid == node_id:
                return key
        raise KeyError(node_id)

    def __contains__(self, node_id: str) -> bool:
        return any(nid == node_id for nid, _ in self.nodes)


@dataclass
class ElectionConfig:
    election_id: str
    candidates: list  # of Candidate
    abstain_address: bytes
    start_time: int
    end_time: int
    authority_pubkey: bytes
    roster: NodeRoster
    token_amount: int = DEFAULT_TOKEN_AMOUNT
    genesis_time: int = 0
    registration_start: int = 0
    registration_end: int | None = None  # defaults to end_time
    min_liveness_frames: int = DEFAULT_MIN_LIVENESS_FRAMES
    eligibility_age: int = DEFAULT_ELIGIBILITY_AGE
    provisional_results: bool = False
    otp_ttl: int = DEFAULT_OTP_TTL
    otp_attempts: int = DEFAULT_OTP_ATTEMPTS

    def __post_init__(self):
        if self.start_time > self.end_time:
            raise ValueError("voting window is inverted")
        if self.token_amount < 1:
            raise ValueError("token amount must be at least 1")
        if len(self.abstain_address) != ADDRESS_SIZE:
            raise ValueError("abstain address must be 20 bytes")
        names = [c.name for c in self.candidates]
        if len(set(names)) != len(names):
            raise ValueError("duplicate candidate names")

    @property
    def candidate_addresses(self) -> set:
        return {c.address for c in self.candidates}

    @property
    def vote_targets(self) -> set:
        return self.candidate_addresses | {self.abstain_address}

    def registration_window(self) -> tuple:
        end = self.end_time if self.registration_end is None else self.registration_end
        return self.registration_start, end

    def candidate_name(self, address: bytes) -> str | None:
        for cand in self.candidates:
            if cand.address == address:
                return cand.name
        return None

    def params_digest(self) -> bytes:
        """Commitment over the election parameters, embedded in genesis."""
        parts = [
            codec.encode_str(self.election_id),
            codec.encode_u64(self.start_time),
            codec.encode_u64(self.end_time),
            codec.encode_u64(self.token_amount),
            codec.encode_bytes(self.abstain_address),
            codec.encode_bytes(self.authority_pubkey),
            codec.encode_list(
                sorted(self.candidates, key=lambda c: c.name),
                lambda c: codec.encode_str(c.name) + codec.encode_bytes(c.address),
            ),
            codec.encode_list(
                list(self.roster.nodes),
                lambda n: codec.encode_str(n[0]) + codec.encode_bytes(n[1]),
            ),
        ]
        return hash_bytes(b"election-params:" + b"".join(parts))

    # --- JSON round-trip (public config file) ---

    def to_dict(self) -> dict:
        return {
            "election_id": self.election_id,
            "candidates": [
                {"name": c.name, "address": to_hex(c.address)} for c in self.candidates
            ],
            "abstain_address": to_hex(self.abstain_address),
            "start_time": self.start_time,
            "end_time": self.end_time,
            "authority_pubkey": to_hex(self.authority_pubkey),
            "roster": [
                {"node_id": nid, "public_key": to_hex(key)}
                for nid, key in self.roster.nodes
            ],
            "token_amount": self.token_amount,
            "genesis_time": self.genesis_time,
            "registration_start": self.registration_start,
            "registration_end": self.registration_end,
            "min_liveness_frames": self.min_liveness_frames,
            "eligibility_age": self.eligibility_age,
            "provisional_results": self.provisional_results,
            "otp_ttl": self.otp_ttl,
            "otp_attempts": self.otp_attempts,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "ElectionConfig":
        return cls(
            election_id=raw["election_id"],
            candidates=[
                Candidate(c["name"], from_hex(c["address"], ADDRESS_SIZE))
                for c in raw["candidates"]
            ],
            abstain_address=from_hex(raw["abstain_address"], ADDRESS_SIZE),
            start_time=raw["start_time"],
            end_time=raw["end_time"],
            authority_pubkey=from_hex(raw["authority_pubkey"], PUBKEY_SIZE),
            roster=NodeRoster(
                tuple(
                    (n["node_id"], from_hex(n["public_key"], PUBKEY_SIZE))
                    for n in raw["roster"]
                )
            ),
            token_amount=raw.get("token_amount", DEFAULT_TOKEN_AMOUNT),
            genesis_time=raw.get("genesis_time", 0),
            registration_start=raw.get("registration_start", 0),
            registration_end=raw.get("registration_end"),
            min_liveness_frames=raw.get(
                "min_liveness_frames", DEFAULT_MIN_LIVENESS_FRAMES
            ),
            eligibility_age=raw.get("eligibility_age", DEFAULT_ELIGIBILITY_AGE),
            provisional_results=raw.get("provisional_results", False),
            otp_ttl=raw.get("otp_ttl", DEFAULT_OTP_TTL),
            otp_attempts=raw.get("otp_attempts", DEFAULT_OTP_ATTEMPTS),
        )

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "ElectionConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def make_election(
    election_id: str,
    candidate_names: list,
    start_time: int,
    end_time: int,
    node_ids: list,
    authority: KeyPair,
    node_keys: dict,
    **overrides,
) -> ElectionConfig:
    """Assemble a config with derived candidate/abstain sink addresses."""
    candidates = [
        Candidate(name, tagged_address(f"{election_id}:candidate:{name}"))
        for name in candidate_names
    ]
    roster = NodeRoster(tuple((nid, node_keys[nid].public_key) for nid in node_ids))
    return ElectionConfig(
        election_id=election_id,
        candidates=candidates,
        abstain_address=tagged_address(f"{election_id}:abstain"),
        start_time=start_time,
        end_time=end_time,
        authority_pubkey=authority.public_key,
        roster=roster,
        **overrides,
    )
