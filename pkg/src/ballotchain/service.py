"""HTTP service tying registry, sessions, nodes, and the explorer together.

Mutations funnel through single-writer paths: the registry event log and the
node-0 ledger. Every write that finalizes a block is appended to the chain
file before the registry event that depends on it, so a crash between the
two is always repairable from the chain at boot.
"""

from __future__ import annotations

import datetime as dt
import json
import os
import time

from fastapi import FastAPI, Header, Request
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel, Field

from .arbitration import Arbiter
from .config import ElectionConfig, make_election
from .consensus import Cluster
from .core import Block, Transaction
from .crypto import KeyPair, derive_address, from_hex, hash_bytes, to_hex
from .economics import CostParams, cost_estimate, feasibility_verdict
from .errors import (
    AlreadyBound,
    AlreadyGranted,
    AlreadySwept,
    AlreadyVoted,
    BadStatus,
    BallotChainError,
    CorruptStore,
    DecodeError,
    DuplicateNationalId,
    EmptyFrame,
    InsufficientLiveness,
    InvalidSession,
    KeyInUse,
    MalformedField,
    NotFound,
    NotGranted,
    NotRegistered,
    OtpExhausted,
    OtpExpired,
    OutsideRegistrationWindow,
    PageOutOfRange,
    SessionNotOpen,
    TxRejected,
    Unauthorized,
    WindowClosed,
    WindowStillOpen,
    WrongCode,
)
from .ledger import (
    append_block_file,
    load_chain_file,
    make_genesis,
    validate_chain,
    write_chain_file,
)
from .registry import GovRegistry, GovRegistryEntry, Registry, parse_date
from .storage import IdempotencyStore, dump_compact, read_json, write_json_atomic
from .tally import explorer_pages, recount, sweep_abstain, tally, verify_vote

# HTTP status per machine code; messages are canned so that no request
# field (which may be an identity value) echoes back in an error body
_STATUS = {
    DuplicateNationalId: 409,
    MalformedField: 422,
    NotFound: 404,
    OtpExpired: 403,
    OtpExhausted: 403,
    WrongCode: 403,
    InvalidSession: 401,
    AlreadyBound: 409,
    KeyInUse: 409,
    AlreadyGranted: 409,
    OutsideRegistrationWindow: 403,
    BadStatus: 409,
    NotRegistered: 404,
    NotGranted: 403,
    WindowClosed: 403,
    AlreadyVoted: 409,
    SessionNotOpen: 409,
    EmptyFrame: 422,
    InsufficientLiveness: 403,
    TxRejected: 422,
    WindowStillOpen: 409,
    AlreadySwept: 409,
    PageOutOfRange: 404,
    Unauthorized: 401,
    DecodeError: 422,
    CorruptStore: 500,
}


# canned per-code text: request fields (which may be identity values) must
# never echo back through an error body
_PUBLIC_TEXT = {
    "DuplicateNationalId": "a registration already exists",
    "MalformedField": "a submitted field failed validation",
    "NotFound": "no matching record",
    "OtpExpired": "the login code has expired",
    "OtpExhausted": "too many wrong codes; request a new one",
    "WrongCode": "the login code does not match",
    "InvalidSession": "the session token is not valid",
    "AlreadyBound": "a public key is already bound",
    "KeyInUse": "that public key belongs to another registration",
    "AlreadyGranted": "a ballot token was already issued",
    "OutsideRegistrationWindow": "registration is not open",
    "BadStatus": "the registration is not in the required state",
    "NotRegistered": "no registration for that key",
    "NotGranted": "no ballot token for that key",
    "WindowClosed": "voting is not open",
    "AlreadyVoted": "a ballot was already cast",
    "SessionNotOpen": "the voting session is not open",
    "EmptyFrame": "the liveness frame is empty",
    "InsufficientLiveness": "not enough live frames",
    "WindowStillOpen": "voting has not closed yet",
    "AlreadySwept": "remaining tokens were already swept",
    "PageOutOfRange": "no such page",
    "Unauthorized": "admin credential required",
    "DecodeError": "the payload does not decode",
    "CorruptStore": "stored election data fails integrity checks",
}


def _error_response(error: BallotChainError) -> JSONResponse:
    status = _STATUS.get(type(error), 400)
    if isinstance(error, TxRejected):
        text = f"the transaction was rejected: {error.reason}"
    else:
        text = _PUBLIC_TEXT.get(error.code, "request failed")
    return JSONResponse(
        status_code=status,
        content={"code": error.code, "message": text},
    )


class ServiceConfig:
    """Deployment knobs; everything stateful lives under data_dir."""

    def __init__(self, data_dir, admin_token="change-me",
                 tls_mode="test_plaintext", certfile=None, keyfile=None):
        if tls_mode not in ("required", "test_plaintext"):
            raise ValueError(f"unknown tls_mode {tls_mode!r}")
        if tls_mode == "required" and not (certfile and keyfile):
            raise ValueError("tls_mode=required needs certfile and keyfile")
        self.data_dir = str(data_dir)
        self.admin_token = admin_token
        self.tls_mode = tls_mode
        self.certfile = certfile
        self.keyfile = keyfile


class ElectionService:
    """All live state plus the persistence discipline for one election."""

    def __init__(self, service_cfg: ServiceConfig, clock=time.time):
        self.service_cfg = service_cfg
        self.clock = clock
        self.cfg: ElectionConfig | None = None
        self.authority: KeyPair | None = None
        self.cluster: Cluster | None = None
        self.registry: Registry | None = None
        self.arbiter: Arbiter | None = None
        self.gov: GovRegistry = GovRegistry([])
        os.makedirs(service_cfg.data_dir, exist_ok=True)
        self.idempotency = IdempotencyStore(self._path("idempotency.jsonl"))

    # -- paths ---------------------------------------------------------------

    def _path(self, name: str) -> str:
        return os.path.join(self.service_cfg.data_dir, name)

    @property
    def chain_path(self) -> str:
        return self._path("chain.dat")

    def now(self) -> int:
        return int(self.clock())

    @property
    def node(self):
        return self.cluster.nodes["node-0"]

    @property
    def blocks(self):
        return self.node.ledger.blocks

    def require_initialized(self):
        if self.cfg is None:
            raise NotFound("no election configured")

    # -- lifecycle -----------------------------------------------------------

    def initialize(self, params: dict) -> dict:
        if self.cfg is not None or os.path.exists(self._path("election.json")):
            raise BadStatus("an election is already configured")
        seed = params.get("seed")
        num_nodes = int(params.get("num_nodes", 5))
        node_ids = [f"node-{i}" for i in range(num_nodes)]
        if seed is None:
            authority = KeyPair.generate()
            node_keys = {nid: KeyPair.generate() for nid in node_ids}
        else:
            tag = f"{params['election_id']}:{seed}"
            authority = KeyPair.from_seed(hash_bytes(f"{tag}:authority".encode()))
            node_keys = {
                nid: KeyPair.from_seed(hash_bytes(f"{tag}:{nid}".encode()))
                for nid in node_ids
            }
        overrides = {
            key: params[key]
            for key in ("token_amount", "registration_start",
                        "registration_end", "min_liveness_frames",
                        "eligibility_age", "provisional_results",
                        "otp_ttl", "otp_attempts", "genesis_time")
            if key in params
        }
        cfg = make_election(
            election_id=params["election_id"],
            candidate_names=list(params["candidates"]),
            start_time=int(params["start_time"]),
            end_time=int(params["end_time"]),
            node_ids=node_ids,
            authority=authority,
            node_keys=node_keys,
            **overrides,
        )
        cfg.save(self._path("election.json"))
        write_json_atomic(self._path("keys.json"), {
            "authority": authority.secret_bytes().hex(),
            "nodes": {nid: k.secret_bytes().hex()
                      for nid, k in node_keys.items()},
        })
        gov_entries = [
            GovRegistryEntry(
                national_id=e["national_id"],
                full_name=e["full_name"],
                dob=parse_date(e["dob"]),
                phone=e["phone"],
            )
            for e in params.get("gov_registry", [])
        ]
        write_json_atomic(self._path("gov-registry.json"), [
            {"national_id": e.national_id, "full_name": e.full_name,
             "dob": e.dob.isoformat(), "phone": e.phone}
            for e in gov_entries
        ])
        genesis = make_genesis(cfg, authority)
        write_chain_file(self.chain_path, [genesis])
        self._wire(cfg, authority, node_keys, [genesis], gov_entries)
        return {"election_id": cfg.election_id,
                "genesis_hash": to_hex(genesis.block_hash)}

    def boot(self, recovery: bool = True):
        """Load everything back from data_dir; CorruptStore on violations."""
        cfg = ElectionConfig.load(self._path("election.json"))
        keys = read_json(self._path("keys.json"))
        if keys is None:
            raise CorruptStore("keys.json missing")
        authority = KeyPair.from_secret_bytes(from_hex(keys["authority"]))
        node_keys = {nid: KeyPair.from_secret_bytes(from_hex(raw))
                     for nid, raw in keys["nodes"].items()}
        blocks, torn = load_chain_file(self.chain_path, strict=not recovery)
        if torn:
            write_chain_file(self.chain_path, blocks)  # drop the torn tail
        result = validate_chain(blocks, cfg)
        if not result.ok:
            raise CorruptStore(
                f"chain fails validation at block {result.bad_index}: "
                f"{result.reason}"
            )
        gov_entries = [
            GovRegistryEntry(
                national_id=e["national_id"], full_name=e["full_name"],
                dob=parse_date(e["dob"]), phone=e["phone"],
            )
            for e in read_json(self._path("gov-registry.json"), default=[])
        ]
        self._wire(cfg, authority, node_keys, blocks, gov_entries,
                   recovery=recovery)
        return self

    def _wire(self, cfg, authority, node_keys, blocks, gov_entries,
              recovery: bool = True):
        self.cfg = cfg
        self.authority = authority
        self.gov = GovRegistry(gov_entries)
        genesis = blocks[0]
        self.cluster = Cluster(cfg, node_keys, genesis)
        if len(blocks) > 1:
            for node in self.cluster.nodes.values():
                node.adopt_chain(list(blocks))
        if os.path.exists(self._path("registry-events.jsonl")):
            self.registry = Registry.load(cfg, authority,
                                          self.service_cfg.data_dir,
                                          recovery=recovery)
        else:
            self.registry = Registry(cfg, authority,
                                     store_dir=self.service_cfg.data_dir)
        repaired = self.registry.reconcile_with_chain(blocks)
        self.arbiter = Arbiter(cfg, self.registry, self.cluster)
        self.idempotency = IdempotencyStore(self._path("idempotency.jsonl"))
        return repaired

    def pump(self) -> Block | None:
        """Run proposal rounds until the shared mempool drains."""
        produced = None
        while any(n.mempool for n in self.cluster.nodes.values()):
            block, _ = self.cluster.run_height(now=self.now())
            if block is None:
                break
            append_block_file(self.chain_path, block)
            produced = block
        return produced

    # -- registry flows --------------------------------------------------------

    def register(self, fields: dict) -> dict:
        self.require_initialized()
        record = self.registry.register_voter(**fields)
        election_date = dt.datetime.fromtimestamp(
            self.cfg.start_time, dt.timezone.utc
        ).date()
        record = self.registry.verify_eligibility(
            record.national_id, self.gov, election_date
        )
        return {
            "national_id": record.national_id,
            "status": record.status,
            "reason": record.rejection_reason,
        }

    def otp_issue(self, national_id: str) -> dict:
        self.require_initialized()
        challenge = self.registry.issue_otp(national_id, self.now())
        return {"sent": True, "expires_at": challenge.expires_at,
                "attempts": challenge.attempts_remaining}

    def otp_verify(self, national_id: str, code: str) -> dict:
        self.require_initialized()
        session = self.registry.verify_otp(national_id, code, self.now())
        return {"session_token": session.token,
                "expires_at": session.expires_at}

    def bind_key(self, session_token: str, public_key_hex: str) -> dict:
        """Bind the key, then mint and finalize its ballot token."""
        self.require_initialized()
        public_key = from_hex(public_key_hex)
        now = self.now()
        binding = self.registry.bind_public_key(session_token, public_key, now)
        nonce = self.node.overlay_state().nonce(self.authority.address)
        mint = self.registry.grant_token(binding.national_id, nonce=nonce,
                                         now=now)
        accepted, rejections = self.cluster.broadcast_tx("node-0", mint)
        if "node-0" not in accepted:
            raise TxRejected(rejections.get("node-0", "BadNonce"))
        self.pump()
        if self.node.ledger.find_transaction(mint.tx_hash()) is None:
            raise CorruptStore("grant mint failed to finalize")
        self.registry.confirm_grant(binding.national_id, mint.tx_hash())
        return {
            "bound": True,
            "address": to_hex(mint.to_address),
            "grant_tx": to_hex(mint.tx_hash()),
            "amount": mint.amount,
        }

    # -- voting flows -----------------------------------------------------------

    def liveness_frame(self, public_key_hex: str | None, frame_hex: str,
                       session_id: str | None) -> dict:
        self.require_initialized()
        frame = from_hex(frame_hex) if frame_hex else b""
        now = self.now()
        if session_id is None:
            if public_key_hex is None:
                raise MalformedField("public_key")
            session = self.arbiter.authenticate_voter(
                from_hex(public_key_hex), frame, now
            )
        else:
            self.arbiter.record_liveness_frame(session_id, frame, now)
            session = self.arbiter.sessions[session_id]
        latest = session.receipts[-1]
        return {
            "session_id": session.session_id,
            "receipts": len(session.receipts),
            "live_receipts": sum(1 for r in session.receipts if r.verdict),
            "chain_value": to_hex(latest.chain_value),
            "needed": self.cfg.min_liveness_frames,
        }

    def submit_vote(self, session_id: str, tx_hex: str) -> dict:
        self.require_initialized()
        tx = Transaction.decode(from_hex(tx_hex))
        tx_id = self.arbiter.submit_vote(session_id, tx)
        block = self.pump()
        record = verify_vote(tx.from_pubkey, self.blocks)
        finalized = record is not None and record.tx_hash == tx.tx_hash()
        return {
            "tx_hash": tx_id,
            "status": "finalized" if finalized else "pending",
            "block_index": record.block_index if finalized else None,
            "block_hash": to_hex(record.block_hash) if finalized else None,
        }

    def vote_known(self, tx_hash_hex: str) -> bool:
        raw = from_hex(tx_hash_hex)
        if self.node.ledger.find_transaction(raw) is not None:
            return True
        return any(raw in n.mempool for n in self.cluster.nodes.values())

    # -- public reads -------------------------------------------------------------

    def results(self) -> dict:
        self.require_initialized()
        result = tally(self.blocks, self.cfg)
        now = self.now()
        closed = now > self.cfg.end_time
        if not closed and not self.cfg.provisional_results:
            return {
                "available": False,
                "reason": "voting-open",
                "results_available_at": self.cfg.end_time,
                "total_minted": result.total_minted,
                "turnout_fraction": result.turnout_fraction,
            }
        body = result.to_dict()
        body["available"] = True
        body["provisional"] = not closed
        return body

    def verify_key(self, pubkey_hex: str) -> dict:
        self.require_initialized()
        record = verify_vote(from_hex(pubkey_hex), self.blocks)
        if record is None:
            raise NotFound("no ballot recorded for this key")
        return record.to_dict()

    def blocks_page(self, page: int, size: int) -> dict:
        self.require_initialized()
        result = explorer_pages(self.blocks, page, size)
        result["showing"] = (
            f"{result['shown']} of {result['total_blocks']} blocks"
        )
        return result

    def block_detail(self, hash_hex: str) -> dict:
        self.require_initialized()
        wanted = from_hex(hash_hex)
        for block in self.blocks:
            if block.block_hash != wanted:
                continue
            return {
                "index": block.index,
                "previous_hash": to_hex(block.prev_hash),
                "block_hash": to_hex(block.block_hash),
                "size_kb": block.size_kb,
                "timestamp": block.timestamp,
                "proposer_id": block.proposer_id,
                "signatures": len(block.quorum_signatures),
                "transactions": [
                    {
                        "tx_hash": to_hex(tx.tx_hash()),
                        "kind": tx.kind,
                        "from_pubkey": to_hex(tx.from_pubkey),
                        "to_address": to_hex(tx.to_address),
                        "amount": tx.amount,
                        "timestamp": tx.timestamp,
                        "nonce": tx.nonce,
                    }
                    for tx in block.transactions
                ],
            }
        raise NotFound("block hash not on the canonical chain")

    def election_bundle(self) -> dict:
        self.require_initialized()
        cfg = self.cfg
        return {
            "election_id": cfg.election_id,
            "candidates": [
                {"name": c.name, "address": to_hex(c.address)}
                for c in cfg.candidates
            ],
            "abstain_address": to_hex(cfg.abstain_address),
            "start_time": cfg.start_time,
            "end_time": cfg.end_time,
            "authority_pubkey": to_hex(cfg.authority_pubkey),
            "token_amount": cfg.token_amount,
            "min_liveness_frames": cfg.min_liveness_frames,
            "nodes": list(cfg.roster.node_ids()),
        }

    # -- admin --------------------------------------------------------------------

    def close_election(self) -> dict:
        self.require_initialized()
        now = self.now()
        txs = sweep_abstain(self.node.ledger.state, self.cfg,
                            self.authority, now)
        for tx in txs:
            accepted, rejections = self.cluster.broadcast_tx("node-0", tx)
            if "node-0" not in accepted:
                raise TxRejected(rejections.get("node-0", "BadNonce"))
        if txs:
            self.pump()
        result = tally(self.blocks, self.cfg)
        body = {"swept": len(txs), "tally": result.to_dict()}
        write_json_atomic(self._path("final-tally.json"), body)
        return body

    def audit(self) -> dict:
        self.require_initialized()
        registered = [b.public_key for b in self.registry.bindings.values()]
        rejection_log = [reason for _, reason in self.node.rejections]
        report = recount(self.blocks, registered, self.cfg,
                         rejection_log=rejection_log)
        return report.to_dict()

    def cost_report(self, voters: int, penetration: float | None) -> dict:
        report = cost_estimate(CostParams(voters=voters)).to_dict()
        report["voters"] = voters
        if penetration is not None:
            report["feasibility"] = feasibility_verdict(penetration)
            report["internet_penetration_pct"] = penetration
        return report


# -- request bodies ---------------------------------------------------------


class RegisterBody(BaseModel):
    national_id: str
    first_name: str
    last_name: str
    email: str
    dob: str
    phone: str
    voter_card_number: str
    city: str
    postal_address: str
    photos: list[str] = Field(default_factory=list)
    video: str | None = None


class OtpIssueBody(BaseModel):
    national_id: str


class OtpVerifyBody(BaseModel):
    national_id: str
    code: str


class BindBody(BaseModel):
    session_token: str
    public_key: str


class FrameBody(BaseModel):
    public_key: str | None = None
    session_id: str | None = None
    frame: str


class VoteBody(BaseModel):
    session_id: str
    tx: str


class ElectionBody(BaseModel):
    election_id: str
    candidates: list[str]
    start_time: int
    end_time: int
    seed: int | None = None
    num_nodes: int = 5
    token_amount: int | None = None
    registration_start: int | None = None
    registration_end: int | None = None
    min_liveness_frames: int | None = None
    eligibility_age: int | None = None
    provisional_results: bool | None = None
    genesis_time: int | None = None
    gov_registry: list[dict] = Field(default_factory=list)


def create_app(service: ElectionService) -> FastAPI:
    app = FastAPI(title="ballot ledger service", docs_url=None,
                  redoc_url=None, openapi_url=None)
    app.state.service = service

    @app.exception_handler(BallotChainError)
    async def on_domain_error(request: Request, error: BallotChainError):
        return _error_response(error)

    def require_admin(authorization: str | None):
        expected = f"Bearer {service.service_cfg.admin_token}"
        if authorization != expected:
            raise Unauthorized("admin credential required")

    @app.get("/healthz")
    def healthz():
        ready = service.cfg is not None
        return {
            "ready": ready,
            "height": service.node.ledger.height if ready else None,
        }

    @app.post("/register")
    def register(body: RegisterBody):
        fields = body.model_dump()
        fields["photos"] = [from_hex(p) for p in body.photos]
        fields["video"] = from_hex(body.video) if body.video else None
        return service.register(fields)

    @app.post("/otp/issue")
    def otp_issue(body: OtpIssueBody):
        return service.otp_issue(body.national_id)

    @app.post("/otp/verify")
    def otp_verify(body: OtpVerifyBody):
        return service.otp_verify(body.national_id, body.code)

    @app.post("/keys/bind")
    def keys_bind(body: BindBody,
                  idempotency_key: str | None = Header(default=None)):
        if idempotency_key:
            stored = service.idempotency.get(idempotency_key)
            if stored is not None:
                return stored
        response = service.bind_key(body.session_token, body.public_key)
        if idempotency_key:
            service.idempotency.put(idempotency_key, response)
        return response

    @app.post("/liveness/frame")
    def liveness_frame(body: FrameBody):
        return service.liveness_frame(body.public_key, body.frame,
                                      body.session_id)

    @app.post("/vote")
    def vote(body: VoteBody,
             idempotency_key: str | None = Header(default=None)):
        if idempotency_key:
            stored = service.idempotency.get(idempotency_key)
            # replay only if the tx it acknowledged still exists; a crash
            # that lost the mempool means the client must be re-processed
            if stored is not None and service.vote_known(stored["tx_hash"]):
                return stored
        response = service.submit_vote(body.session_id, body.tx)
        if idempotency_key:
            service.idempotency.put(idempotency_key, response)
        return response

    @app.get("/public/results")
    def public_results():
        return service.results()

    @app.get("/public/verify/{pubkey_hex}")
    def public_verify(pubkey_hex: str):
        return service.verify_key(pubkey_hex)

    @app.get("/public/blocks")
    def public_blocks(page: int = 1, size: int = 100):
        return service.blocks_page(page, size)

    @app.get("/public/blocks/{hash_hex}")
    def public_block(hash_hex: str):
        return service.block_detail(hash_hex)

    @app.get("/public/election")
    def public_election():
        return service.election_bundle()

    @app.post("/admin/election")
    def admin_election(body: ElectionBody,
                       authorization: str | None = Header(default=None)):
        require_admin(authorization)
        params = {k: v for k, v in body.model_dump().items() if v is not None}
        return service.initialize(params)

    @app.post("/admin/election/close")
    def admin_close(authorization: str | None = Header(default=None)):
        require_admin(authorization)
        return service.close_election()

    @app.get("/admin/audit")
    def admin_audit(authorization: str | None = Header(default=None)):
        require_admin(authorization)
        # canonical bytes: the CLI writes the identical report file
        return Response(content=dump_compact(service.audit()),
                        media_type="application/json")

    @app.get("/admin/cost-estimate")
    def admin_cost(voters: int = 100_000_000,
                   penetration: float | None = None,
                   authorization: str | None = Header(default=None)):
        require_admin(authorization)
        return service.cost_report(voters, penetration)

    return app


def build_service(data_dir, admin_token="change-me", clock=time.time,
                  recovery: bool = True,
                  election_params: dict | None = None) -> ElectionService:
    """Service over a data dir; boots existing state when present.

    With election_params and an empty dir, the election (and its genesis
    block) is created immediately so the service comes up ready.
    """
    service = ElectionService(
        ServiceConfig(data_dir, admin_token=admin_token), clock=clock
    )
    if os.path.exists(service._path("election.json")):
        service.boot(recovery=recovery)
    elif election_params is not None:
        service.initialize(election_params)
    return service


def snapshot_and_restore(data_dir, admin_token="change-me") -> ElectionService:
    """Rebuild a service from its data dir and prove the state is sound.

    Raises CorruptStore unless the chain validates, registry state agrees
    with the chain, and both stores re-serialize byte-identically.
    """
    from .registry import KEY_BOUND, TOKEN_GRANTED

    service = ElectionService(ServiceConfig(data_dir, admin_token=admin_token))
    service.boot(recovery=True)

    blocks = service.blocks
    raw = open(service.chain_path, "rb").read()
    rebuilt = b"".join(
        len(b.wire_bytes()).to_bytes(4, "big") + b.wire_bytes()
        for b in blocks
    )
    if raw != rebuilt:
        raise CorruptStore("chain file does not re-serialize byte-identically")

    events_path = service._path("registry-events.jsonl")
    if os.path.exists(events_path):
        body = open(events_path, "rb").read()
        lines = [ln for ln in body.split(b"\n") if ln]
        for i, line in enumerate(lines):
            if dump_compact(json.loads(line)).encode() != line:
                raise CorruptStore(f"registry event {i} not canonical")

    registry = service.registry
    minted_addresses = {
        tx.to_address
        for block in blocks[1:]
        for tx in block.transactions
        if tx.kind == "mint" and tx.amount > 0
    }
    for national_id, record in registry.records.items():
        if record.status != TOKEN_GRANTED:
            continue
        binding = registry.bindings.get(national_id)
        if binding is None:
            raise CorruptStore(f"granted record {national_id} has no key")
        if derive_address(binding.public_key) not in minted_addresses:
            raise CorruptStore("granted record has no on-chain mint")
    for national_id, binding in registry.bindings.items():
        record = registry.records.get(national_id)
        if record is None or record.status not in (KEY_BOUND, TOKEN_GRANTED):
            raise CorruptStore("key binding without a matching record state")
    return service


def serve(data_dir, host="127.0.0.1", port=8000, admin_token="change-me",
          tls_mode="test_plaintext", certfile=None, keyfile=None):
    import uvicorn

    service_cfg = ServiceConfig(data_dir, admin_token=admin_token,
                                tls_mode=tls_mode, certfile=certfile,
                                keyfile=keyfile)
    service = ElectionService(service_cfg)
    if os.path.exists(service._path("election.json")):
        service.boot()
    app = create_app(service)
    kwargs = {}
    if tls_mode == "required":
        kwargs = {"ssl_certfile": certfile, "ssl_keyfile": keyfile}
    uvicorn.run(app, host=host, port=port, **kwargs)
