import { ApiClient, ApiError, BlockDetailReply } from "../api";
import { clear, el } from "../dom";
import { isHex } from "../hex";

// Fixed column set and order for the block table.
export const EXPLORER_COLUMNS = ["previous_hash", "block_hash", "size_kb", "time", "timestamp"] as const;

const PAGE_SIZE = 10;

export function renderExplorerPage(root: HTMLElement, api: ApiClient): void {
  clear(root);
  const showing = el("p", { id: "explorer-showing" });
  const table = el("table", { id: "block-table" });
  const pager = el("div", { id: "explorer-pager" });
  const detail = el("div", { id: "block-detail" });
  const verify = el("div", { id: "verify-panel" });
  let page = 1;

  async function loadPage(): Promise<void> {
    let reply;
    try {
      reply = await api.blocks(page, PAGE_SIZE);
    } catch (err) {
      showing.textContent = err instanceof ApiError ? `${err.code}: ${err.message}` : "network error";
      return;
    }
    showing.textContent = reply.showing;
    clear(table);
    const head = el("tr", {});
    for (const column of EXPLORER_COLUMNS) {
      head.append(el("th", {}, [column]));
    }
    table.append(head);
    for (const row of reply.rows) {
      const tr = el("tr", { class: "block-row", "data-hash": row.block_hash });
      for (const column of EXPLORER_COLUMNS) {
        tr.append(el("td", { "data-column": column }, [String(row[column])]));
      }
      tr.addEventListener("click", () => void loadDetail(row.block_hash));
      table.append(tr);
    }

    clear(pager);
    const prev = el("button", { id: "pager-prev" }, ["newer"]);
    const next = el("button", { id: "pager-next" }, ["older"]);
    if (page <= 1) prev.setAttribute("disabled", "");
    if (page >= reply.pages) next.setAttribute("disabled", "");
    prev.addEventListener("click", () => {
      page -= 1;
      void loadPage();
    });
    next.addEventListener("click", () => {
      page += 1;
      void loadPage();
    });
    pager.append(prev, el("span", {}, [`page ${reply.page} of ${reply.pages}`]), next);
  }

  async function loadDetail(hashHex: string): Promise<void> {
    let block: BlockDetailReply;
    try {
      block = await api.blockDetail(hashHex);
    } catch (err) {
      detail.textContent = err instanceof ApiError ? `${err.code}: ${err.message}` : "network error";
      return;
    }
    clear(detail);
    detail.append(
      el("h3", {}, [`Block ${block.index}`]),
      el("p", { id: "detail-previous-hash" }, [`previous hash: ${block.previous_hash}`]),
      el("p", {}, [`block hash: ${block.block_hash}`]),
      el("p", {}, [`proposer: ${block.proposer_id}, signatures: ${block.signatures}`]),
      el("p", {}, [`${block.transactions.length} transactions`]),
    );
    for (const tx of block.transactions) {
      detail.append(el("p", { class: "tx-line" }, [`${tx.kind} ${tx.tx_hash.slice(0, 16)} amount ${tx.amount}`]));
    }
  }

  function buildVerifyForm(): void {
    const input = el("input", { id: "verify-pubkey", type: "text", placeholder: "public key (64 hex chars)" });
    const button = el("button", { id: "verify-check" }, ["Verify my vote"]);
    const result = el("div", { id: "verify-result" });
    button.addEventListener("click", async () => {
      const value = input.value.trim();
      if (!isHex(value, 32)) {
        result.textContent = "enter a 64-character lowercase hex public key";
        result.dataset.kind = "invalid";
        return;
      }
      try {
        const record = await api.verifyKey(value);
        clear(result);
        delete result.dataset.kind;
        result.append(
          el("p", {}, [`recorded in block ${record.block_index} at position ${record.position}`]),
          el("p", {}, [`transaction: ${record.tx_hash}`]),
          el("p", {}, [`block hash: ${record.block_hash}`]),
        );
      } catch (err) {
        if (err instanceof ApiError && err.code === "NotFound") {
          result.textContent = "no ballot recorded for this key";
          result.dataset.kind = "NotFound";
        } else {
          result.textContent = err instanceof ApiError ? `${err.code}: ${err.message}` : "network error";
          result.dataset.kind = "error";
        }
      }
    });
    verify.append(el("h3", {}, ["Verify a vote"]), input, button, result);
  }

  root.append(el("h2", {}, ["Block Explorer"]), showing, table, pager, detail, verify);
  buildVerifyForm();
  void loadPage();
}
