/**
 * Full browser-flow drive against a live dev server.
 *
 * Run scripts/e2e.sh to boot the chain server and the vite dev server and
 * execute this file. It renders the real pages in a DOM, fills the forms,
 * and lets every request travel through the dev proxy to the actual
 * backend. Nothing here stubs the network.
 */
import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";
import { ApiClient } from "../src/api";
import { renderExplorerPage } from "../src/pages/explorer";
import { renderRegisterPage } from "../src/pages/register";
import { renderVotePage } from "../src/pages/vote";

const BASE = process.env.E2E_BASE ?? "http://127.0.0.1:5199";
const OUTBOX = process.env.E2E_OUTBOX ?? "/tmp/e2e-ui/data/sms-outbox.jsonl";

const VOTER = {
  national_id: "600000000001",
  first_name: "Ada",
  last_name: "Sample",
  email: "ada@example.org",
  dob: "1990-04-01",
  phone: "+14155550001",
  voter_card_number: "VC-0001",
  city: "Springfield",
  postal_address: "1 Main Street",
};

const seen: { path: string; body: string }[] = [];

// Point the pages' same-origin requests at the dev server and record what
// leaves the page, the way a browser network tab would.
const rawFetch = globalThis.fetch.bind(globalThis);
globalThis.fetch = ((input: RequestInfo | URL, init?: RequestInit) => {
  const path =
    typeof input === "string" ? input : input instanceof URL ? input.pathname + input.search : input.url;
  const url = path.startsWith("/") ? BASE + path : path;
  seen.push({ path, body: typeof init?.body === "string" ? init.body : "" });
  return rawFetch(url, init);
}) as typeof fetch;

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

function q<T extends Element>(root: ParentNode, selector: string): T {
  const node = root.querySelector(selector);
  if (!node) throw new Error(`no element matches ${selector}`);
  return node as T;
}

function setValue(root: ParentNode, selector: string, value: string): void {
  q<HTMLInputElement>(root, selector).value = value;
}

function setFile(root: ParentNode, selector: string, file: File): void {
  Object.defineProperty(q(root, selector), "files", { value: [file], configurable: true });
}

async function waitFor(root: ParentNode, selector: string, ms = 30_000): Promise<Element> {
  const deadline = Date.now() + ms;
  for (;;) {
    const node = root.querySelector(selector);
    if (node) return node;
    if (Date.now() > deadline) throw new Error(`timed out waiting for ${selector}`);
    await sleep(25);
  }
}

async function waitText(node: Element, pattern: RegExp, ms = 30_000): Promise<string> {
  const deadline = Date.now() + ms;
  for (;;) {
    const text = node.textContent ?? "";
    if (pattern.test(text)) return text;
    if (Date.now() > deadline) throw new Error(`timed out waiting for ${pattern}, saw "${text}"`);
    await sleep(25);
  }
}

async function smsCode(phone: string): Promise<string> {
  const deadline = Date.now() + 15_000;
  for (;;) {
    try {
      const lines = readFileSync(OUTBOX, "utf8").trim().split("\n");
      const mine = lines.map((line) => JSON.parse(line)).filter((m) => m.to === phone);
      if (mine.length > 0) return String(mine[mine.length - 1].body).slice(-6);
    } catch {
      // outbox not written yet
    }
    if (Date.now() > deadline) throw new Error(`no SMS delivered to ${phone}`);
    await sleep(100);
  }
}

describe("full flow against the dev server", () => {
  it("registers, logs in, binds a fresh key, votes, and verifies inclusion", async () => {
    // Registration.
    const reg = document.createElement("div");
    document.body.append(reg);
    renderRegisterPage(reg, new ApiClient());
    for (const [name, value] of Object.entries(VOTER)) setValue(reg, `#field-${name}`, value);
    q<HTMLFormElement>(reg, "#register-form").dispatchEvent(new Event("submit", { cancelable: true }));
    await waitText(q(reg, "#register-status"), /registration status: Verified/);

    // Login and OTP.
    const room = document.createElement("div");
    document.body.append(room);
    renderVotePage(room, new ApiClient(), { pollIntervalMs: 250, maxPolls: 60 });
    setValue(room, "#login-national-id", VOTER.national_id);
    q<HTMLElement>(room, "#login-send").click();
    await waitFor(room, "#otp-code");
    setValue(room, "#otp-code", await smsCode(VOTER.phone));
    q<HTMLElement>(room, "#otp-verify").click();
    await waitFor(room, "#key-generate");

    // Key generation happens in the page; the server only ever sees the
    // public key, which we pick off the observed bind request.
    setValue(room, "#key-passphrase", "correct horse battery");
    q<HTMLElement>(room, "#key-generate").click();
    await waitFor(room, "#liveness-file");
    const bind = seen.find((r) => r.path === "/keys/bind");
    if (!bind) throw new Error("no bind request observed");
    const publicKey = JSON.parse(bind.body).public_key as string;
    expect(publicKey).toMatch(/^[0-9a-f]{64}$/);

    // Liveness by file upload (no camera in this environment).
    const progress = q(room, "#liveness-progress");
    for (let i = 0; i < 3; i++) {
      setFile(room, "#liveness-file", new File([new Uint8Array([120 + i, 7, i])], `frame-${i}.png`));
      q<HTMLElement>(room, "#liveness-send").click();
      await waitText(progress, new RegExp(`${i + 1} of \\d+ live frames`));
    }
    q<HTMLElement>(room, "#liveness-continue").click();

    // Ballot.
    await waitFor(room, "#candidate-alice");
    const radio = q<HTMLInputElement>(room, "#candidate-alice");
    radio.checked = true;
    radio.dispatchEvent(new Event("change"));
    q<HTMLElement>(room, "#vote-submit").click();
    await waitFor(room, "#vote-tx-hash");
    const txLine = q(room, "#vote-tx-hash").textContent ?? "";
    const txHash = txLine.replace("transaction: ", "").trim();
    expect(txHash).toMatch(/^[0-9a-f]{64}$/);
    await waitText(q(room, "#vote-inclusion"), /finalized in block \d+/);

    // No request ever carried key custody material: the passphrase stays
    // on the page and the encrypted key file is never uploaded.
    for (const r of seen) {
      expect(r.body).not.toContain("correct horse battery");
      expect(r.body).not.toContain('"ciphertext"');
      expect(r.body).not.toContain('"salt"');
      expect(r.body).not.toContain('"kdf"');
    }

    // Explorer: the chain shows the vote and the verify form finds it.
    const exp = document.createElement("div");
    document.body.append(exp);
    renderExplorerPage(exp, new ApiClient());
    await waitText(q(exp, "#explorer-showing"), /\d+ of \d+ blocks/);
    setValue(exp, "#verify-pubkey", publicKey);
    q<HTMLElement>(exp, "#verify-check").click();
    const verdict = await waitText(q(exp, "#verify-result"), /recorded in block \d+ at position \d+/);
    expect(verdict).toContain("recorded in block");

    // The genesis block's previous hash is all zeros; walk to the oldest
    // page and open the last row.
    for (let guard = 0; guard < 50; guard++) {
      const next = q<HTMLButtonElement>(exp, "#pager-next");
      if (next.hasAttribute("disabled")) break;
      next.click();
      await waitText(q(exp, "#explorer-pager"), new RegExp(`page ${guard + 2} of`), 10_000);
    }
    const rows = exp.querySelectorAll(".block-row");
    if (rows.length === 0) throw new Error("no explorer rows rendered");
    (rows[rows.length - 1] as HTMLElement).click();
    await waitText(q(exp, "#block-detail"), new RegExp("previous hash: 0{64}"));
  });
});
