import { ApiClient, ApiError, RegisterRequest } from "../api";
import { clear, el } from "../dom";
import { REGISTRATION_FIELDS, RegistrationField, validateRegistration } from "../validate";

const LABELS: Record<RegistrationField, string> = {
  national_id: "National ID",
  first_name: "First Name",
  last_name: "Last Name",
  email: "Email",
  dob: "Date of Birth",
  phone: "Phone",
  voter_card_number: "Voter Card Number",
  city: "City",
  postal_address: "Address",
};

export function renderRegisterPage(root: HTMLElement, api: ApiClient): void {
  clear(root);
  const form = el("form", { id: "register-form", novalidate: "" });
  const status = el("p", { class: "status", id: "register-status" });

  for (const name of REGISTRATION_FIELDS) {
    const row = el("div", { class: "field-row" }, [
      el("label", { for: `field-${name}` }, [LABELS[name]]),
      el("input", { id: `field-${name}`, name, type: "text" }),
      el("span", { class: "field-error", "data-field": name }),
    ]);
    form.append(row);
  }
  form.append(el("button", { type: "submit" }, ["Register"]));

  form.addEventListener("submit", async (ev) => {
    ev.preventDefault();
    const values = {} as Record<RegistrationField, string>;
    for (const name of REGISTRATION_FIELDS) {
      values[name] = (form.querySelector(`[name="${name}"]`) as HTMLInputElement).value;
    }
    const errors = validateRegistration(values);
    for (const name of REGISTRATION_FIELDS) {
      const slot = form.querySelector(`[data-field="${name}"]`) as HTMLElement;
      slot.textContent = errors[name] ?? "";
    }
    if (Object.keys(errors).length > 0) {
      status.textContent = "fix the highlighted fields";
      status.dataset.kind = "invalid";
      return;
    }
    try {
      const reply = await api.register(values as unknown as RegisterRequest);
      status.textContent = reply.reason
        ? `registration status: ${reply.status} (${reply.reason})`
        : `registration status: ${reply.status}`;
      status.dataset.kind = reply.status === "Rejected" ? "rejected" : "accepted";
    } catch (err) {
      if (err instanceof ApiError) {
        status.textContent = `${err.code}: ${err.message}`;
        status.dataset.kind = err.code;
      } else {
        status.textContent = "network error";
        status.dataset.kind = "network";
      }
    }
  });

  root.append(el("h2", {}, ["Register to Vote"]), form, status);
}
