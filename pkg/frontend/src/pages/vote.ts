import { ApiClient, ApiError, ElectionBundle, InclusionReply, VoteReply } from "../api";
import { BallotTx } from "../codec";
import { clear, el } from "../dom";
import { fromHex, toHex } from "../hex";
import { VoterKeypair, exportKeyfile, generateKeypair, importKeyfile, signBallot } from "../keys";
import { wireBytes } from "../codec";

export interface VotePageOptions {
  pollIntervalMs?: number;
  maxPolls?: number;
  now?: () => number; // unix seconds, injectable for tests
  randomId?: () => string;
}

// The ballot-path rejections the page must tell apart for the voter.
export const VOTE_ERROR_TEXT: Record<string, string> = {
  DoubleVote: "Your ballot was already counted. A second vote is not allowed.",
  OutsideWindow: "Voting is closed. Ballots are only accepted inside the voting window.",
  InsufficientLiveness: "Not enough live frames were captured. Complete the liveness check first.",
  AlreadyVoted: "A ballot was already cast for this key.",
};

// TxRejected carries the ledger's reason after the final colon.
export function voteErrorKind(err: ApiError): string {
  if (err.code === "TxRejected") {
    const reason = err.message.split(": ").pop()?.trim();
    return reason || "TxRejected";
  }
  return err.code;
}

function defaultRandomId(): string {
  if (typeof crypto.randomUUID === "function") return crypto.randomUUID();
  const raw = new Uint8Array(16);
  crypto.getRandomValues(raw);
  return toHex(raw);
}

export function renderVotePage(root: HTMLElement, api: ApiClient, opts: VotePageOptions = {}): void {
  const pollInterval = opts.pollIntervalMs ?? 1500;
  const maxPolls = opts.maxPolls ?? 40;
  const now = opts.now ?? (() => Math.floor(Date.now() / 1000));
  const randomId = opts.randomId ?? defaultRandomId;

  clear(root);
  const heading = el("h2", {}, ["Cast Your Vote"]);
  const stage = el("div", { id: "vote-stage" });
  const status = el("p", { class: "status", id: "vote-status" });
  root.append(heading, stage, status);

  let nationalId = "";
  let sessionToken = "";
  let keypair: VoterKeypair | null = null;
  let sessionId = "";
  let bundle: ElectionBundle | null = null;

  const fail = (err: unknown) => {
    if (err instanceof ApiError) {
      const kind = voteErrorKind(err);
      status.textContent = VOTE_ERROR_TEXT[kind] ?? `${err.code}: ${err.message}`;
      status.dataset.kind = kind;
    } else {
      status.textContent = "network error";
      status.dataset.kind = "network";
    }
  };

  const ok = (text: string) => {
    status.textContent = text;
    delete status.dataset.kind;
  };

  function loginStep(): void {
    clear(stage);
    const input = el("input", { id: "login-national-id", type: "text", placeholder: "12-digit national ID" });
    const button = el("button", { id: "login-send" }, ["Send login code"]);
    button.addEventListener("click", async () => {
      nationalId = input.value.trim();
      try {
        const reply = await api.otpIssue(nationalId);
        ok(`code sent by SMS; ${reply.attempts} attempts`);
        otpStep();
      } catch (err) {
        fail(err);
      }
    });
    stage.append(el("h3", {}, ["Login"]), input, button);
  }

  function otpStep(): void {
    clear(stage);
    const input = el("input", { id: "otp-code", type: "text", placeholder: "6-digit code" });
    const button = el("button", { id: "otp-verify" }, ["Verify"]);
    button.addEventListener("click", async () => {
      try {
        const reply = await api.otpVerify(nationalId, input.value.trim());
        sessionToken = reply.session_token;
        ok("logged in");
        keyStep();
      } catch (err) {
        fail(err);
      }
    });
    stage.append(el("h3", {}, ["Enter the SMS code"]), input, button);
  }

  function keyStep(): void {
    clear(stage);
    const pass = el("input", { id: "key-passphrase", type: "password", placeholder: "key file passphrase" });
    const generate = el("button", { id: "key-generate" }, ["Generate a new key"]);
    const fileInput = el("input", { id: "key-file", type: "file" });
    const importBtn = el("button", { id: "key-import" }, ["Import key file"]);
    const output = el("div", { id: "key-output" });

    const bind = async () => {
      if (!keypair) return;
      try {
        const reply = await api.bindKey(sessionToken, toHex(keypair.publicKey), randomId());
        ok(`key bound; ballot token minted (${reply.grant_tx.slice(0, 16)})`);
      } catch (err) {
        if (err instanceof ApiError && err.code === "AlreadyBound") {
          ok("key already bound; continuing");
        } else {
          fail(err);
          return;
        }
      }
      livenessStep();
    };

    generate.addEventListener("click", async () => {
      if (!pass.value) {
        status.textContent = "choose a passphrase first";
        status.dataset.kind = "invalid";
        return;
      }
      keypair = generateKeypair();
      const blob = await exportKeyfile(keypair, pass.value);
      clear(output);
      // keep a copyable backup on screen; the secret never leaves the page
      output.append(
        el("p", {}, [`public key: ${blob.public_key}`]),
        el("textarea", { id: "key-backup", readonly: "" }, [JSON.stringify(blob)]),
        el("p", {}, ["Save this encrypted key file before continuing."]),
      );
      await bind();
    });

    importBtn.addEventListener("click", async () => {
      const file = (fileInput as HTMLInputElement).files?.[0];
      if (!file || !pass.value) {
        status.textContent = "pick a key file and enter its passphrase";
        status.dataset.kind = "invalid";
        return;
      }
      try {
        keypair = await importKeyfile(JSON.parse(await file.text()), pass.value);
      } catch (err) {
        status.textContent = err instanceof Error ? err.message : "key file import failed";
        status.dataset.kind = "keyfile";
        return;
      }
      await bind();
    });

    stage.append(
      el("h3", {}, ["Your voting key"]),
      pass,
      generate,
      el("p", {}, ["or restore one:"]),
      fileInput,
      importBtn,
      output,
    );
  }

  function livenessStep(): void {
    clear(stage);
    const progress = el("p", { id: "liveness-progress" }, ["0 live frames"]);
    const frameInput = el("input", { id: "liveness-file", type: "file" });
    const sendBtn = el("button", { id: "liveness-send" }, ["Send frame"]);
    const continueBtn = el("button", { id: "liveness-continue", disabled: "" }, ["Continue to ballot"]);
    let satisfied = false;

    const sendFrame = async (frame: Uint8Array) => {
      if (!keypair) return;
      try {
        const reply = await api.livenessFrame(toHex(frame), sessionId ? { sessionId } : { publicKeyHex: toHex(keypair.publicKey) });
        sessionId = reply.session_id;
        progress.textContent = `${reply.live_receipts} of ${reply.needed} live frames`;
        if (reply.live_receipts >= reply.needed && !satisfied) {
          satisfied = true;
          continueBtn.removeAttribute("disabled");
          ok("liveness check complete");
        }
      } catch (err) {
        fail(err);
      }
    };

    sendBtn.addEventListener("click", async () => {
      const file = (frameInput as HTMLInputElement).files?.[0];
      if (!file) {
        status.textContent = "pick an image frame to upload";
        status.dataset.kind = "invalid";
        return;
      }
      await sendFrame(new Uint8Array(await file.arrayBuffer()));
    });

    continueBtn.addEventListener("click", () => {
      if (satisfied) ballotStep();
    });

    const parts: (HTMLElement | string)[] = [
      el("h3", {}, ["Liveness check"]),
      progress,
    ];
    if (typeof navigator !== "undefined" && navigator.mediaDevices?.getUserMedia) {
      const cameraBtn = el("button", { id: "liveness-camera" }, ["Capture from camera"]);
      cameraBtn.addEventListener("click", async () => {
        try {
          const stream = await navigator.mediaDevices.getUserMedia({ video: true });
          const video = document.createElement("video");
          video.srcObject = stream;
          await video.play();
          const canvas = document.createElement("canvas");
          canvas.width = video.videoWidth || 320;
          canvas.height = video.videoHeight || 240;
          canvas.getContext("2d")?.drawImage(video, 0, 0);
          stream.getTracks().forEach((t) => t.stop());
          const dataUrl = canvas.toDataURL("image/png");
          const raw = atob(dataUrl.split(",")[1] ?? "");
          const frame = Uint8Array.from(raw, (c) => c.charCodeAt(0));
          await sendFrame(frame);
        } catch {
          status.textContent = "camera unavailable; upload a frame instead";
          status.dataset.kind = "camera";
        }
      });
      parts.push(cameraBtn, el("p", {}, ["or upload a frame:"]));
    } else {
      parts.push(el("p", {}, ["No camera detected; upload image frames instead."]));
    }
    parts.push(frameInput, sendBtn, continueBtn);
    stage.append(...parts);
  }

  function ballotStep(): void {
    clear(stage);
    const list = el("div", { id: "candidate-list" });
    const submit = el("button", { id: "vote-submit", disabled: "" }, ["Submit vote"]);
    let chosen: string | null = null;

    api
      .election()
      .then((b) => {
        bundle = b;
        const options = [...b.candidates, { name: "abstain", address: b.abstain_address }];
        for (const candidate of options) {
          const radio = el("input", {
            type: "radio",
            name: "candidate",
            id: `candidate-${candidate.name}`,
            value: candidate.address,
          });
          radio.addEventListener("change", () => {
            chosen = candidate.address;
            submit.removeAttribute("disabled");
          });
          list.append(el("label", { for: `candidate-${candidate.name}` }, [radio, candidate.name]));
        }
      })
      .catch(fail);

    submit.addEventListener("click", async () => {
      if (!keypair || !bundle || !chosen) return;
      const tx: BallotTx = {
        election_id: bundle.election_id,
        from_pubkey: keypair.publicKey,
        to_address: fromHex(chosen),
        amount: bundle.token_amount,
        timestamp: now(),
        nonce: 0,
        kind: "vote",
        memo: new Uint8Array(0),
        signature: new Uint8Array(64),
      };
      const signed = signBallot(tx, keypair);
      try {
        const reply = await api.vote(sessionId, toHex(wireBytes(signed)), randomId());
        ok(`ballot submitted: ${reply.tx_hash}`);
        doneStep(reply);
      } catch (err) {
        fail(err);
      }
    });

    stage.append(el("h3", {}, ["Choose a candidate"]), list, submit);
  }

  function doneStep(reply: VoteReply): void {
    clear(stage);
    const txLine = el("p", { id: "vote-tx-hash" }, [`transaction: ${reply.tx_hash}`]);
    const inclusion = el("div", { id: "vote-inclusion" }, ["waiting for finalization..."]);
    stage.append(el("h3", {}, ["Ballot submitted"]), txLine, inclusion);

    const render = (record: InclusionReply) => {
      clear(inclusion);
      inclusion.append(
        el("p", {}, [`finalized in block ${record.block_index}`]),
        el("p", {}, [`block hash: ${record.block_hash}`]),
        el("p", {}, [`position: ${record.position}`]),
        el("p", {}, ["Your vote is on the chain. This device will not vote again."]),
      );
    };

    let polls = 0;
    const poll = async () => {
      if (!keypair) return;
      polls += 1;
      try {
        const record = await api.verifyKey(toHex(keypair.publicKey));
        if (record.tx_hash === reply.tx_hash) {
          render(record);
          return;
        }
      } catch {
        // not included yet; keep polling
      }
      if (polls < maxPolls) setTimeout(poll, pollInterval);
      else inclusion.textContent = "finalization is taking longer than expected; check the explorer";
    };
    void poll();
  }

  loginStep();
}
