// Client-side mirror of the server's registration field rules, so a bad form
// never produces a request.  The server still enforces everything.

const NATIONAL_ID = /^\d{12}$/;
const PHONE = /^\+[1-9]\d{6,14}$/;
const EMAIL = /^[^@\s]+@[^@\s]+\.[^@\s]+$/;
const ISO_DATE = /^(\d{4})-(\d{2})-(\d{2})$/;

export const REGISTRATION_FIELDS = [
  "national_id",
  "first_name",
  "last_name",
  "email",
  "dob",
  "phone",
  "voter_card_number",
  "city",
  "postal_address",
] as const;

export type RegistrationField = (typeof REGISTRATION_FIELDS)[number];

function isCalendarDate(value: string): boolean {
  const m = ISO_DATE.exec(value);
  if (!m) return false;
  const [year, month, day] = [Number(m[1]), Number(m[2]), Number(m[3])];
  const date = new Date(Date.UTC(year, month - 1, day));
  return (
    date.getUTCFullYear() === year &&
    date.getUTCMonth() === month - 1 &&
    date.getUTCDate() === day
  );
}

export function fieldError(name: RegistrationField, value: string): string | null {
  if (!value.trim()) return "required";
  switch (name) {
    case "national_id":
      return NATIONAL_ID.test(value) ? null : "must be exactly 12 digits";
    case "phone":
      return PHONE.test(value) ? null : "must be +country then 7 to 15 digits";
    case "email":
      return EMAIL.test(value) ? null : "must look like name@host.tld";
    case "dob":
      return isCalendarDate(value) ? null : "must be a YYYY-MM-DD date";
    default:
      return null;
  }
}

export function validateRegistration(values: Record<RegistrationField, string>): Partial<Record<RegistrationField, string>> {
  const errors: Partial<Record<RegistrationField, string>> = {};
  for (const name of REGISTRATION_FIELDS) {
    const problem = fieldError(name, values[name] ?? "");
    if (problem) errors[name] = problem;
  }
  return errors;
}
