import { ApiClient, ApiError, CloseReply, ResultsReply, TallyBody } from "../api";
import { clear, el } from "../dom";

function renderTally(container: HTMLElement, tally: TallyBody): void {
  clear(container);
  const table = el("table", { id: "tally-table" });
  const head = el("tr", {}, [el("th", {}, ["candidate"]), el("th", {}, ["tokens"])]);
  table.append(head);
  for (const [name, count] of Object.entries(tally.per_candidate)) {
    table.append(
      el("tr", { "data-candidate": name }, [
        el("td", {}, [name]),
        el("td", { class: "count" }, [String(count)]),
      ]),
    );
  }
  container.append(
    table,
    el("p", { id: "tally-winners" }, [`winners: ${tally.winners.join(", ")}`]),
    el("p", { id: "tally-abstain" }, [`abstain balance: ${tally.abstain_balance}`]),
    el("p", { id: "tally-minted" }, [`total minted: ${tally.total_minted}`]),
    el("p", { id: "tally-turnout" }, [`turnout: ${tally.turnout_fraction}`]),
  );
}

export function renderAdminPage(root: HTMLElement, api: ApiClient): void {
  clear(root);
  const status = el("p", { class: "status", id: "admin-status" });
  const login = el("div", { id: "admin-login" });
  const panel = el("div", { id: "admin-panel", hidden: "" });

  const tokenInput = el("input", { id: "admin-token", type: "password", placeholder: "admin token" });
  const tokenBtn = el("button", { id: "admin-token-save" }, ["Use token"]);
  login.append(el("h3", {}, ["Admin login"]), tokenInput, tokenBtn);

  const requireLogin = () => {
    panel.setAttribute("hidden", "");
    login.removeAttribute("hidden");
    status.textContent = "admin credential required";
    status.dataset.kind = "Unauthorized";
  };

  const fail = (err: unknown) => {
    if (err instanceof ApiError && err.code === "Unauthorized") {
      requireLogin();
      return;
    }
    if (err instanceof ApiError) {
      status.textContent = `${err.code}: ${err.message}`;
      status.dataset.kind = err.code;
    } else {
      status.textContent = "network error";
      status.dataset.kind = "network";
    }
  };

  tokenBtn.addEventListener("click", () => {
    api.setAdminToken(tokenInput.value || null);
    login.setAttribute("hidden", "");
    panel.removeAttribute("hidden");
    status.textContent = "";
    delete status.dataset.kind;
  });

  // create election
  const createBox = el("div", { id: "admin-create" });
  const idInput = el("input", { id: "create-id", type: "text", placeholder: "election id" });
  const candidatesInput = el("input", { id: "create-candidates", type: "text", placeholder: "candidates, comma separated" });
  const startInput = el("input", { id: "create-start", type: "text", placeholder: "start unix time" });
  const endInput = el("input", { id: "create-end", type: "text", placeholder: "end unix time" });
  const extraInput = el("textarea", { id: "create-extra", placeholder: "optional JSON overrides" });
  const createBtn = el("button", { id: "create-submit" }, ["Create election"]);
  createBtn.addEventListener("click", async () => {
    let extra: Record<string, unknown> = {};
    if (extraInput.value.trim()) {
      try {
        extra = JSON.parse(extraInput.value);
      } catch {
        status.textContent = "overrides are not valid JSON";
        status.dataset.kind = "invalid";
        return;
      }
    }
    try {
      const reply = await api.createElection({
        election_id: idInput.value.trim(),
        candidates: candidatesInput.value.split(",").map((c) => c.trim()).filter(Boolean),
        start_time: Number(startInput.value),
        end_time: Number(endInput.value),
        ...extra,
      });
      status.textContent = `election ${reply.election_id} created; genesis ${reply.genesis_hash.slice(0, 16)}`;
      delete status.dataset.kind;
    } catch (err) {
      fail(err);
    }
  });
  createBox.append(el("h3", {}, ["Create election"]), idInput, candidatesInput, startInput, endInput, extraInput, createBtn);

  // close + tally
  const closeBox = el("div", { id: "admin-close" });
  const closeBtn = el("button", { id: "close-submit" }, ["Close election and tally"]);
  const closeOut = el("div", { id: "close-result" });
  closeBtn.addEventListener("click", async () => {
    let reply: CloseReply;
    try {
      reply = await api.closeElection();
    } catch (err) {
      fail(err);
      return;
    }
    status.textContent = `closed; ${reply.swept} residual tokens swept to abstain`;
    delete status.dataset.kind;
    renderTally(closeOut, reply.tally);
  });
  closeBox.append(el("h3", {}, ["Close election"]), closeBtn, closeOut);

  // public results view with the provisional gate
  const resultsBox = el("div", { id: "admin-results" });
  const resultsBtn = el("button", { id: "results-refresh" }, ["Refresh results"]);
  const resultsOut = el("div", { id: "results-body" });
  resultsBtn.addEventListener("click", async () => {
    let reply: ResultsReply;
    try {
      reply = await api.results();
    } catch (err) {
      fail(err);
      return;
    }
    clear(resultsOut);
    if (!reply.available) {
      resultsOut.append(
        el("p", { id: "results-withheld" }, [
          `results are withheld until voting closes (at ${reply.results_available_at})`,
        ]),
        el("p", {}, [`turnout so far: ${reply.turnout_fraction}`]),
      );
      return;
    }
    if (reply.provisional) {
      resultsOut.append(el("p", { id: "results-provisional" }, ["provisional: voting is still open"]));
    }
    const body = el("div", { id: "results-tally" });
    resultsOut.append(body);
    renderTally(body, reply);
  });
  resultsBox.append(el("h3", {}, ["Results"]), resultsBtn, resultsOut);

  // audit report
  const auditBox = el("div", { id: "admin-audit" });
  const auditBtn = el("button", { id: "audit-refresh" }, ["Run audit"]);
  const auditOut = el("div", { id: "audit-body" });
  auditBtn.addEventListener("click", async () => {
    try {
      const reply = await api.audit();
      clear(auditOut);
      auditOut.append(
        el("p", {}, [`vote transactions: ${reply.total_vote_txs}, accepted: ${reply.accepted}`]),
        el("p", {}, [`registered non-voters: ${reply.registered_nonvoters}`]),
        el("p", {}, [`unregistered keys: ${reply.unregistered_keys.length}`]),
      );
    } catch (err) {
      fail(err);
    }
  });
  auditBox.append(el("h3", {}, ["Audit"]), auditBtn, auditOut);

  panel.append(createBox, closeBox, resultsBox, auditBox);
  root.append(el("h2", {}, ["Admin Panel"]), status, login, panel);
}
