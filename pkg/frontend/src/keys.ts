// Voter key custody.  Keys are generated in the browser and never leave it:
// the server only ever sees the public key and signed ballot bytes.  For
// backup the pair is exported as a passphrase-encrypted key file
// (PBKDF2 -> AES-GCM), importable on another device.

import nacl from "tweetnacl";
import { BallotTx, TX_SIGN_TAG, canonicalBytes } from "./codec";
import { concatBytes, fromHex, toHex } from "./hex";

export interface VoterKeypair {
  publicKey: Uint8Array;
  secretKey: Uint8Array; // 64-byte expanded form; first 32 bytes are the seed
}

export function generateKeypair(): VoterKeypair {
  const seed = new Uint8Array(32);
  crypto.getRandomValues(seed);
  return nacl.sign.keyPair.fromSeed(seed);
}

export function keypairFromSeed(seed: Uint8Array): VoterKeypair {
  return nacl.sign.keyPair.fromSeed(seed);
}

export async function deriveAddress(publicKey: Uint8Array): Promise<Uint8Array> {
  const digest = await crypto.subtle.digest("SHA-256", publicKey as BufferSource);
  return new Uint8Array(digest).slice(0, 20);
}

export function signBallot(tx: BallotTx, key: VoterKeypair): BallotTx {
  if (toHex(key.publicKey) !== toHex(tx.from_pubkey)) {
    throw new Error("signing key does not match the ballot sender");
  }
  const preimage = concatBytes(TX_SIGN_TAG, canonicalBytes(tx));
  const signature = nacl.sign.detached(preimage, key.secretKey);
  return { ...tx, signature };
}

export interface KeyfileBlob {
  version: 1;
  kdf: "PBKDF2-SHA256";
  iterations: number;
  salt: string; // hex
  iv: string; // hex
  ciphertext: string; // hex, AES-GCM over the 32-byte seed
  public_key: string; // hex, for display before decryption
}

const KDF_ITERATIONS = 600_000;

async function deriveAesKey(passphrase: string, salt: Uint8Array, iterations: number): Promise<CryptoKey> {
  const material = await crypto.subtle.importKey(
    "raw",
    new TextEncoder().encode(passphrase) as BufferSource,
    "PBKDF2",
    false,
    ["deriveKey"],
  );
  return crypto.subtle.deriveKey(
    { name: "PBKDF2", hash: "SHA-256", salt: salt as BufferSource, iterations },
    material,
    { name: "AES-GCM", length: 256 },
    false,
    ["encrypt", "decrypt"],
  );
}

export async function exportKeyfile(key: VoterKeypair, passphrase: string): Promise<KeyfileBlob> {
  const salt = new Uint8Array(16);
  const iv = new Uint8Array(12);
  crypto.getRandomValues(salt);
  crypto.getRandomValues(iv);
  const aes = await deriveAesKey(passphrase, salt, KDF_ITERATIONS);
  const seed = key.secretKey.slice(0, 32);
  const ciphertext = await crypto.subtle.encrypt(
    { name: "AES-GCM", iv: iv as BufferSource },
    aes,
    seed as BufferSource,
  );
  return {
    version: 1,
    kdf: "PBKDF2-SHA256",
    iterations: KDF_ITERATIONS,
    salt: toHex(salt),
    iv: toHex(iv),
    ciphertext: toHex(new Uint8Array(ciphertext)),
    public_key: toHex(key.publicKey),
  };
}

export async function importKeyfile(blob: KeyfileBlob, passphrase: string): Promise<VoterKeypair> {
  if (blob.version !== 1 || blob.kdf !== "PBKDF2-SHA256") {
    throw new Error("unsupported key file");
  }
  const aes = await deriveAesKey(passphrase, fromHex(blob.salt), blob.iterations);
  let seed: ArrayBuffer;
  try {
    seed = await crypto.subtle.decrypt(
      { name: "AES-GCM", iv: fromHex(blob.iv) as BufferSource },
      aes,
      fromHex(blob.ciphertext) as BufferSource,
    );
  } catch {
    throw new Error("wrong passphrase or damaged key file");
  }
  const pair = nacl.sign.keyPair.fromSeed(new Uint8Array(seed));
  if (toHex(pair.publicKey) !== blob.public_key) {
    throw new Error("key file public key does not match its seed");
  }
  return pair;
}
