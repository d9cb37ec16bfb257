"""Authentication server: registration, eligibility, OTP, key binding, grants.

Everything here lives in the private store. Nothing in this module may put a
name, id number, or contact detail into a transaction or a public response;
the only value that crosses to the chain is a derived key address.
"""

from __future__ import annotations

import datetime as dt
import hmac
import random
import re
from dataclasses import dataclass, field, replace

from .config import ElectionConfig
from .core import Transaction, sign_transaction
from .crypto import KeyPair, derive_address, from_hex, hash_bytes, to_hex
from .errors import (
    AlreadyBound,
    AlreadyGranted,
    BadStatus,
    DuplicateNationalId,
    InvalidSession,
    KeyInUse,
    MalformedField,
    NotFound,
    OtpExhausted,
    OtpExpired,
    OutsideRegistrationWindow,
    WrongCode,
)
from .storage import EventLog

PENDING = "Pending"
VERIFIED = "Verified"
REJECTED = "Rejected"
KEY_BOUND = "KeyBound"
TOKEN_GRANTED = "TokenGranted"

_FORWARD = {
    PENDING: {VERIFIED, REJECTED},
    VERIFIED: {KEY_BOUND},
    KEY_BOUND: {TOKEN_GRANTED},
    REJECTED: set(),
    TOKEN_GRANTED: set(),
}

_NATIONAL_ID = re.compile(r"^\d{12}$")
_PHONE = re.compile(r"^\+[1-9]\d{6,14}$")
_EMAIL = re.compile(r"^[^@\s]+@[^@\s]+\.[^@\s]+$")

SESSION_TTL = 900


@dataclass(frozen=True)
class VoterRecord:
    national_id: str
    first_name: str
    last_name: str
    email: str
    dob: dt.date
    phone: str
    voter_card_number: str
    city: str
    postal_address: str
    photo_hashes: tuple[bytes, ...] = ()
    video_hash: bytes | None = None
    status: str = PENDING
    rejection_reason: str | None = None

    @property
    def full_name(self) -> str:
        return f"{self.first_name} {self.last_name}"


@dataclass
class OtpChallenge:
    code: str
    issued_at: int
    expires_at: int
    attempts_remaining: int = 3


@dataclass(frozen=True)
class Session:
    token: str
    national_id: str
    issued_at: int
    expires_at: int


@dataclass(frozen=True)
class KeyBinding:
    national_id: str
    public_key: bytes
    bound_at: int


@dataclass(frozen=True)
class GovRegistryEntry:
    national_id: str
    full_name: str
    dob: dt.date
    phone: str


class GovRegistry:
    """Read-only lookup standing in for the government citizen record."""

    def __init__(self, entries):
        self.entries = {e.national_id: e for e in entries}

    def lookup(self, national_id: str) -> GovRegistryEntry | None:
        return self.entries.get(national_id)

    @classmethod
    def synthetic(cls, seed: int, count: int,
                  base_year: int = 1950) -> "GovRegistry":
        """Deterministic citizen fixture for demos and tests."""
        rng = random.Random(seed)
        entries = []
        for i in range(count):
            national_id = f"{rng.randrange(10**11, 10**12)}"
            year = base_year + rng.randrange(0, 60)
            month = rng.randrange(1, 13)
            day = rng.randrange(1, 29)
            entries.append(GovRegistryEntry(
                national_id=national_id,
                full_name=f"Citizen-{i} Fixture",
                dob=dt.date(year, month, day),
                phone=f"+1{rng.randrange(10**9, 10**10)}",
            ))
        return cls(entries)


def parse_date(value) -> dt.date:
    if isinstance(value, dt.date):
        return value
    return dt.date.fromisoformat(value)


def age_on(dob: dt.date, when: dt.date) -> int:
    """Completed years between dob and the given date."""
    years = when.year - dob.year
    if (when.month, when.day) < (dob.month, dob.day):
        years -= 1
    return years


def _validate_application(fields: dict) -> VoterRecord:
    def need(name, pattern=None):
        value = fields.get(name)
        if not isinstance(value, str) or not value.strip():
            raise MalformedField(name)
        if pattern is not None and not pattern.match(value):
            raise MalformedField(name)
        return value

    national_id = need("national_id", _NATIONAL_ID)
    first_name = need("first_name")
    last_name = need("last_name")
    email = need("email", _EMAIL)
    phone = need("phone", _PHONE)
    voter_card_number = need("voter_card_number")
    city = need("city")
    postal_address = need("postal_address")
    try:
        dob = parse_date(fields["dob"])
    except (KeyError, TypeError, ValueError):
        raise MalformedField("dob") from None
    photos = fields.get("photos") or ()
    video = fields.get("video")
    return VoterRecord(
        national_id=national_id,
        first_name=first_name,
        last_name=last_name,
        email=email,
        dob=dob,
        phone=phone,
        voter_card_number=voter_card_number,
        city=city,
        postal_address=postal_address,
        photo_hashes=tuple(hash_bytes(p) for p in photos),
        video_hash=hash_bytes(video) if video else None,
    )


class Registry:
    """Server-side voter store, event-sourced onto one private log file."""

    def __init__(self, cfg: ElectionConfig, authority: KeyPair,
                 store_dir=None, seed: int = 0):
        self.cfg = cfg
        self.authority = authority
        self.records: dict[str, VoterRecord] = {}
        self.bindings: dict[str, KeyBinding] = {}          # national_id ->
        self.key_owner: dict[bytes, str] = {}              # public_key ->
        self.grants: dict[str, str] = {}                   # national_id -> tx hash hex
        self.challenges: dict[str, OtpChallenge] = {}
        self.sessions: dict[str, Session] = {}
        self.outbox: list[dict] = []
        self.rng = random.Random(seed)
        self._log = None
        self._outbox_log = None
        if store_dir is not None:
            self._log = EventLog(f"{store_dir}/registry-events.jsonl")
            self._outbox_log = EventLog(f"{store_dir}/sms-outbox.jsonl")

    # -- event plumbing ----------------------------------------------------

    def _emit(self, event: dict):
        self._apply(event)
        if self._log is not None:
            self._log.append(event)

    def _sms(self, phone: str, body: str):
        message = {"to": phone, "body": body}
        self.outbox.append(message)
        if self._outbox_log is not None:
            self._outbox_log.append(message)

    @classmethod
    def load(cls, cfg, authority, store_dir, seed: int = 0,
             recovery: bool = False) -> "Registry":
        reg = cls(cfg, authority, store_dir=None, seed=seed)
        log = EventLog(f"{store_dir}/registry-events.jsonl")
        events, _ = log.load(recovery=recovery)
        for event in events:
            reg._apply(event)
        reg._log = log
        reg._outbox_log = EventLog(f"{store_dir}/sms-outbox.jsonl")
        reg._outbox_log.load(recovery=recovery)  # repairs a torn tail
        return reg

    def _advance(self, national_id: str, new_status: str,
                 reason: str | None = None):
        record = self.records[national_id]
        if new_status not in _FORWARD[record.status]:
            raise BadStatus(
                f"{record.status} cannot move to {new_status}"
            )
        self.records[national_id] = replace(
            record, status=new_status, rejection_reason=reason
        )

    def _apply(self, event: dict):
        kind = event["event"]
        if kind == "registered":
            raw = dict(event["record"])
            raw["dob"] = parse_date(raw["dob"])
            raw["photo_hashes"] = tuple(from_hex(h) for h in raw["photo_hashes"])
            raw["video_hash"] = (from_hex(raw["video_hash"])
                                 if raw["video_hash"] else None)
            record = VoterRecord(**raw)
            if record.national_id in self.records:
                raise DuplicateNationalId(record.national_id)
            self.records[record.national_id] = record
        elif kind == "eligibility":
            self._advance(event["national_id"], event["status"],
                          event.get("reason"))
        elif kind == "otp_issued":
            self.challenges[event["national_id"]] = OtpChallenge(
                code=event["code"],
                issued_at=event["issued_at"],
                expires_at=event["expires_at"],
                attempts_remaining=event["attempts"],
            )
        elif kind == "otp_attempt":
            challenge = self.challenges.get(event["national_id"])
            if challenge is not None and not event["ok"]:
                challenge.attempts_remaining -= 1
        elif kind == "session":
            session = Session(
                token=event["token"],
                national_id=event["national_id"],
                issued_at=event["issued_at"],
                expires_at=event["expires_at"],
            )
            self.sessions[session.token] = session
        elif kind == "key_bound":
            binding = KeyBinding(
                national_id=event["national_id"],
                public_key=from_hex(event["public_key"]),
                bound_at=event["bound_at"],
            )
            self._advance(binding.national_id, KEY_BOUND)
            self.bindings[binding.national_id] = binding
            self.key_owner[binding.public_key] = binding.national_id
        elif kind == "token_granted":
            self._advance(event["national_id"], TOKEN_GRANTED)
            self.grants[event["national_id"]] = event["tx_hash"]
        else:
            raise ValueError(f"unknown registry event {kind!r}")

    # -- phase 1: registration and eligibility ------------------------------

    def register_voter(self, **fields) -> VoterRecord:
        record = _validate_application(fields)
        if record.national_id in self.records:
            raise DuplicateNationalId(record.national_id)
        self._emit({
            "event": "registered",
            "record": {
                "national_id": record.national_id,
                "first_name": record.first_name,
                "last_name": record.last_name,
                "email": record.email,
                "dob": record.dob.isoformat(),
                "phone": record.phone,
                "voter_card_number": record.voter_card_number,
                "city": record.city,
                "postal_address": record.postal_address,
                "photo_hashes": [to_hex(h) for h in record.photo_hashes],
                "video_hash": to_hex(record.video_hash)
                if record.video_hash else None,
            },
        })
        return self.records[record.national_id]

    def verify_eligibility(self, national_id: str, gov: GovRegistry,
                           election_date: dt.date) -> VoterRecord:
        record = self.records.get(national_id)
        if record is None:
            raise NotFound(national_id)
        if record.status != PENDING:
            raise BadStatus(f"eligibility already decided: {record.status}")
        entry = gov.lookup(national_id)
        reason = None
        if entry is None:
            reason = "NotFound"
        elif entry.full_name != record.full_name:
            reason = "FieldMismatch(full_name)"
        elif entry.dob != record.dob:
            reason = "FieldMismatch(dob)"
        elif age_on(record.dob, election_date) < self.cfg.eligibility_age:
            reason = "Underage"
        status = VERIFIED if reason is None else REJECTED
        self._emit({
            "event": "eligibility",
            "national_id": national_id,
            "status": status,
            "reason": reason,
        })
        body = ("eligibility passed" if reason is None
                else f"eligibility rejected: {reason}")
        self._sms(record.phone, body)
        return self.records[national_id]

    # -- phase 2: OTP login --------------------------------------------------

    def issue_otp(self, national_id: str, now: int) -> OtpChallenge:
        record = self.records.get(national_id)
        if record is None:
            raise NotFound(national_id)
        if record.status != VERIFIED:
            raise BadStatus(f"cannot issue code while {record.status}")
        code = f"{self.rng.randrange(0, 10**6):06d}"
        self._emit({
            "event": "otp_issued",
            "national_id": national_id,
            "code": code,
            "issued_at": now,
            "expires_at": now + self.cfg.otp_ttl,
            "attempts": self.cfg.otp_attempts,
        })
        self._sms(record.phone, f"your login code is {code}")
        return self.challenges[national_id]

    def verify_otp(self, national_id: str, code: str, now: int) -> Session:
        challenge = self.challenges.get(national_id)
        if challenge is None:
            raise OtpExpired("no active code")
        if now > challenge.expires_at:
            raise OtpExpired("code expired")
        if challenge.attempts_remaining <= 0:
            raise OtpExhausted("attempt limit reached")
        ok = hmac.compare_digest(challenge.code.encode(), str(code).encode())
        self._emit({"event": "otp_attempt", "national_id": national_id,
                    "ok": ok})
        if not ok:
            raise WrongCode("code mismatch")
        token = to_hex(hash_bytes(self.rng.randbytes(32)))
        self._emit({
            "event": "session",
            "national_id": national_id,
            "token": token,
            "issued_at": now,
            "expires_at": now + SESSION_TTL,
        })
        return self.sessions[token]

    # -- phase 3: key binding and token grant --------------------------------

    def _session_for(self, token: str, now: int) -> Session:
        session = self.sessions.get(token)
        if session is None or now > session.expires_at:
            raise InvalidSession("unknown or expired session")
        return session

    def bind_public_key(self, session_token: str, public_key: bytes,
                        now: int) -> KeyBinding:
        session = self._session_for(session_token, now)
        national_id = session.national_id
        record = self.records[national_id]
        if national_id in self.bindings:
            raise AlreadyBound(national_id)
        if record.status != VERIFIED:
            raise BadStatus(f"cannot bind key while {record.status}")
        owner = self.key_owner.get(public_key)
        if owner is not None:
            raise KeyInUse("key already bound to another voter")
        self._emit({
            "event": "key_bound",
            "national_id": national_id,
            "public_key": to_hex(public_key),
            "bound_at": now,
        })
        return self.bindings[national_id]

    def grant_token(self, national_id: str, nonce: int,
                    now: int) -> Transaction:
        """Authority mint for a bound key; confirm separately once on chain."""
        record = self.records.get(national_id)
        if record is None:
            raise NotFound(national_id)
        if record.status == TOKEN_GRANTED or national_id in self.grants:
            raise AlreadyGranted(national_id)
        if record.status != KEY_BOUND:
            raise BadStatus(f"cannot grant token while {record.status}")
        reg_start, reg_end = self.cfg.registration_window()
        if not reg_start <= now <= reg_end:
            raise OutsideRegistrationWindow(f"{now} not in "
                                            f"[{reg_start}, {reg_end}]")
        binding = self.bindings[national_id]
        tx = Transaction(
            election_id=self.cfg.election_id,
            from_pubkey=self.authority.public_key,
            to_address=derive_address(binding.public_key),
            amount=self.cfg.token_amount,
            timestamp=now,
            nonce=nonce,
            kind="mint",
        )
        return sign_transaction(tx, self.authority)

    def confirm_grant(self, national_id: str, tx_hash: bytes):
        """Record that the grant mint finalized on chain."""
        if national_id in self.grants:
            return
        self._emit({
            "event": "token_granted",
            "national_id": national_id,
            "tx_hash": to_hex(tx_hash),
        })

    def reconcile_with_chain(self, blocks):
        """After a restart, align grant status with mints already on chain.

        A crash can land between the chain append and the grant event write;
        the chain is authoritative, so the missing event is re-emitted here.
        """
        minted = {}
        for block in blocks:
            for tx in block.transactions:
                if tx.kind == "mint" and tx.amount > 0:
                    minted[tx.to_address] = tx.tx_hash()
        repaired = []
        for national_id, binding in self.bindings.items():
            address = derive_address(binding.public_key)
            if national_id not in self.grants and address in minted:
                self.confirm_grant(national_id, minted[address])
                repaired.append(national_id)
        return repaired

    # -- lookups -------------------------------------------------------------

    def record(self, national_id: str) -> VoterRecord | None:
        return self.records.get(national_id)

    def key_status(self, public_key: bytes) -> str | None:
        """Status of the voter owning a key, without exposing who they are."""
        owner = self.key_owner.get(public_key)
        if owner is None:
            return None
        return self.records[owner].status
