import { afterEach, beforeEach, describe, expect, it } from "vitest";
import { ApiClient } from "../src/api";
import { renderRegisterPage } from "../src/pages/register";
import { FakeBackend, flush } from "./helpers/backend";

const FIG_FIELDS = [
  "first_name",
  "last_name",
  "email",
  "dob",
  "phone",
  "voter_card_number",
  "city",
  "postal_address",
];

let backend: FakeBackend;
let root: HTMLElement;

beforeEach(() => {
  backend = new FakeBackend();
  backend.install();
  root = document.createElement("div");
  document.body.append(root);
  renderRegisterPage(root, new ApiClient());
});

afterEach(() => {
  backend.uninstall();
  root.remove();
});

function fill(values: Record<string, string>) {
  for (const [name, value] of Object.entries(values)) {
    const input = root.querySelector(`[name="${name}"]`) as HTMLInputElement;
    input.value = value;
  }
}

const GOOD = {
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

function submit() {
  (root.querySelector("form") as HTMLFormElement).dispatchEvent(new Event("submit"));
  return flush();
}

describe("registration page", () => {
  it("renders the identity field plus the fixed application field set, in order", () => {
    const names = [...root.querySelectorAll("input[name]")].map((i) => i.getAttribute("name"));
    expect(names).toEqual(["national_id", ...FIG_FIELDS]);
  });

  it("sends nothing when a required field is missing", async () => {
    fill({ ...GOOD, phone: "" });
    await submit();
    const slot = root.querySelector('[data-field="phone"]') as HTMLElement;
    expect(slot.textContent).toBe("required");
    expect(backend.requests).toHaveLength(0);
  });

  it("sends nothing when a field is malformed", async () => {
    fill({ ...GOOD, email: "not-an-email" });
    await submit();
    const slot = root.querySelector('[data-field="email"]') as HTMLElement;
    expect(slot.textContent).toContain("name@host");
    expect(backend.requests).toHaveLength(0);
  });

  it("posts the application and shows the returned status", async () => {
    backend.on("POST", "/register", (req) => {
      expect(req.json.national_id).toBe(GOOD.national_id);
      expect(req.json.postal_address).toBe(GOOD.postal_address);
      return { body: { national_id: GOOD.national_id, status: "Verified", reason: null } };
    });
    fill(GOOD);
    await submit();
    const status = root.querySelector("#register-status") as HTMLElement;
    expect(status.textContent).toBe("registration status: Verified");
  });

  it("shows a rejection reason when eligibility fails", async () => {
    backend.on("POST", "/register", () => ({
      body: { national_id: GOOD.national_id, status: "Rejected", reason: "Underage" },
    }));
    fill(GOOD);
    await submit();
    const status = root.querySelector("#register-status") as HTMLElement;
    expect(status.textContent).toBe("registration status: Rejected (Underage)");
    expect(status.dataset.kind).toBe("rejected");
  });

  it("renders a duplicate registration with its machine code", async () => {
    backend.on("POST", "/register", () =>
      backend.error("DuplicateNationalId", "a registration already exists", 409),
    );
    fill(GOOD);
    await submit();
    const status = root.querySelector("#register-status") as HTMLElement;
    expect(status.textContent).toBe("DuplicateNationalId: a registration already exists");
    expect(status.dataset.kind).toBe("DuplicateNationalId");
  });
});
