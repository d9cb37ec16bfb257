// Wire encoding shared with the ledger: u64 fields are 8-byte big-endian,
// strings and byte fields carry a 4-byte big-endian length prefix, field
// order is fixed.  The ballot is signed over a tagged copy of the encoding
// with the signature field zeroed.

import { concatBytes } from "./hex";

export const PUBKEY_SIZE = 32;
export const ADDRESS_SIZE = 20;
export const SIGNATURE_SIZE = 64;

export const TX_SIGN_TAG = new TextEncoder().encode("ballot-tx:");

export interface BallotTx {
  election_id: string;
  from_pubkey: Uint8Array;
  to_address: Uint8Array;
  amount: number;
  timestamp: number;
  nonce: number;
  kind: "vote" | "mint" | "sweep";
  memo: Uint8Array;
  signature: Uint8Array;
}

export function encodeU64(value: number): Uint8Array {
  if (value < 0 || !Number.isSafeInteger(value)) {
    throw new Error("u64 fields are unsigned integers");
  }
  const out = new Uint8Array(8);
  new DataView(out.buffer).setBigUint64(0, BigInt(value));
  return out;
}

export function encodeBytes(value: Uint8Array): Uint8Array {
  const out = new Uint8Array(4 + value.length);
  new DataView(out.buffer).setUint32(0, value.length);
  out.set(value, 4);
  return out;
}

export function encodeStr(value: string): Uint8Array {
  return encodeBytes(new TextEncoder().encode(value));
}

function encodeTx(tx: BallotTx, signature: Uint8Array): Uint8Array {
  return concatBytes(
    encodeStr(tx.election_id),
    encodeBytes(tx.from_pubkey),
    encodeBytes(tx.to_address),
    encodeU64(tx.amount),
    encodeU64(tx.timestamp),
    encodeU64(tx.nonce),
    encodeStr(tx.kind),
    encodeBytes(tx.memo),
    encodeBytes(signature),
  );
}

export function canonicalBytes(tx: BallotTx): Uint8Array {
  return encodeTx(tx, new Uint8Array(SIGNATURE_SIZE));
}

export function wireBytes(tx: BallotTx): Uint8Array {
  if (tx.signature.length !== SIGNATURE_SIZE) {
    throw new Error("transaction is unsigned");
  }
  return encodeTx(tx, tx.signature);
}

export async function txHash(tx: BallotTx): Promise<Uint8Array> {
  const digest = await crypto.subtle.digest("SHA-256", wireBytes(tx) as BufferSource);
  return new Uint8Array(digest);
}
