// Typed client over the election service routes.  Every number and hash the
// pages show comes back from these calls; nothing is recomputed client-side.

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

export interface RegisterRequest {
  national_id: string;
  first_name: string;
  last_name: string;
  email: string;
  dob: string;
  phone: string;
  voter_card_number: string;
  city: string;
  postal_address: string;
  photos?: string[];
  video?: string | null;
}

export interface RegisterReply {
  national_id: string;
  status: string;
  reason: string | null;
}

export interface OtpIssueReply {
  sent: boolean;
  expires_at: number;
  attempts: number;
}

export interface OtpVerifyReply {
  session_token: string;
  expires_at: number;
}

export interface BindReply {
  bound: boolean;
  address: string;
  grant_tx: string;
  amount: number;
}

export interface FrameReply {
  session_id: string;
  receipts: number;
  live_receipts: number;
  chain_value: string;
  needed: number;
}

export interface VoteReply {
  tx_hash: string;
  status: "finalized" | "pending";
  block_index: number | null;
  block_hash: string | null;
}

export interface InclusionReply {
  tx_hash: string;
  block_index: number;
  block_hash: string;
  position: number;
  timestamp: number;
}

export interface ExplorerRow {
  previous_hash: string;
  block_hash: string;
  size_kb: number;
  time: string;
  timestamp: number;
}

export interface BlocksPageReply {
  rows: ExplorerRow[];
  page: number;
  pages: number;
  total_blocks: number;
  shown: number;
  showing: string;
}

export interface BlockDetailReply {
  index: number;
  previous_hash: string;
  block_hash: string;
  size_kb: number;
  timestamp: number;
  proposer_id: string;
  signatures: number;
  transactions: Array<{
    tx_hash: string;
    kind: string;
    from_pubkey: string;
    to_address: string;
    amount: number;
    timestamp: number;
    nonce: number;
  }>;
}

export interface ElectionBundle {
  election_id: string;
  candidates: Array<{ name: string; address: string }>;
  abstain_address: string;
  start_time: number;
  end_time: number;
  authority_pubkey: string;
  token_amount: number;
  min_liveness_frames: number;
  nodes: string[];
}

export interface TallyBody {
  per_candidate: Record<string, number>;
  abstain_balance: number;
  total_minted: number;
  voted_tokens: number;
  swept_tokens: number;
  unswept_residue: number;
  turnout_fraction: number;
  winners: string[];
}

export type ResultsReply =
  | { available: false; reason: string; results_available_at: number; total_minted: number; turnout_fraction: number }
  | (TallyBody & { available: true; provisional: boolean });

export interface CloseReply {
  swept: number;
  tally: TallyBody;
}

export interface AuditReply {
  total_vote_txs: number;
  accepted: number;
  rejected_by_reason: Record<string, number>;
  per_key_vote_count: Record<string, number>;
  unregistered_keys: string[];
  registered_nonvoters: number;
}

export interface CreateElectionRequest {
  election_id: string;
  candidates: string[];
  start_time: number;
  end_time: number;
  [extra: string]: unknown;
}

async function request<T>(method: string, path: string, body?: unknown, headers?: Record<string, string>): Promise<T> {
  const reply = await fetch(path, {
    method,
    headers: { "Content-Type": "application/json", ...headers },
    body: body === undefined ? undefined : JSON.stringify(body),
  });
  const text = await reply.text();
  let parsed: unknown = null;
  try {
    parsed = text ? JSON.parse(text) : null;
  } catch {
    parsed = null;
  }
  if (!reply.ok) {
    const err = parsed as { code?: string; message?: string } | null;
    throw new ApiError(reply.status, err?.code ?? "HttpError", err?.message ?? reply.statusText);
  }
  return parsed as T;
}

export class ApiClient {
  constructor(private adminToken: string | null = null) {}

  setAdminToken(token: string | null) {
    this.adminToken = token;
  }

  private admin(): Record<string, string> {
    if (!this.adminToken) throw new ApiError(401, "Unauthorized", "admin credential required");
    return { Authorization: `Bearer ${this.adminToken}` };
  }

  register(body: RegisterRequest): Promise<RegisterReply> {
    return request("POST", "/register", body);
  }

  otpIssue(nationalId: string): Promise<OtpIssueReply> {
    return request("POST", "/otp/issue", { national_id: nationalId });
  }

  otpVerify(nationalId: string, code: string): Promise<OtpVerifyReply> {
    return request("POST", "/otp/verify", { national_id: nationalId, code });
  }

  bindKey(sessionToken: string, publicKeyHex: string, idempotencyKey: string): Promise<BindReply> {
    return request("POST", "/keys/bind", { session_token: sessionToken, public_key: publicKeyHex }, { "Idempotency-Key": idempotencyKey });
  }

  livenessFrame(frameHex: string, opts: { publicKeyHex?: string; sessionId?: string }): Promise<FrameReply> {
    const body: Record<string, string> = { frame: frameHex };
    if (opts.sessionId) body.session_id = opts.sessionId;
    else if (opts.publicKeyHex) body.public_key = opts.publicKeyHex;
    return request("POST", "/liveness/frame", body);
  }

  vote(sessionId: string, txHex: string, idempotencyKey: string): Promise<VoteReply> {
    return request("POST", "/vote", { session_id: sessionId, tx: txHex }, { "Idempotency-Key": idempotencyKey });
  }

  results(): Promise<ResultsReply> {
    return request("GET", "/public/results");
  }

  verifyKey(pubkeyHex: string): Promise<InclusionReply> {
    return request("GET", `/public/verify/${pubkeyHex}`);
  }

  blocks(page: number, size: number): Promise<BlocksPageReply> {
    return request("GET", `/public/blocks?page=${page}&size=${size}`);
  }

  blockDetail(hashHex: string): Promise<BlockDetailReply> {
    return request("GET", `/public/blocks/${hashHex}`);
  }

  election(): Promise<ElectionBundle> {
    return request("GET", "/public/election");
  }

  createElection(body: CreateElectionRequest): Promise<{ election_id: string; genesis_hash: string }> {
    return request("POST", "/admin/election", body, this.admin());
  }

  closeElection(): Promise<CloseReply> {
    return request("POST", "/admin/election/close", null, this.admin());
  }

  audit(): Promise<AuditReply> {
    return request("GET", "/admin/audit", undefined, this.admin());
  }
}
