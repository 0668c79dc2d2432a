/**
 * UQEB container encoding (see docs/uqeb-format.md in the repo root).
 *
 * Little-endian: magic "UQEB", u16 version 1, u16 dtype 1 (float32),
 * u64 members / samples / classes, then n u32 labels, then S*n*C float32
 * logits member-major. Encoding is deterministic byte-for-byte.
 */

export const UQEB_MAGIC = "UQEB";
export const UQEB_VERSION = 1;
export const UQEB_DTYPE_F32 = 1;
export const HEADER_SIZE = 32;

export interface UqebData {
  members: number;
  samples: number;
  classes: number;
  /** length samples, each in [0, classes) */
  labels: Uint32Array;
  /** length members * samples * classes, member-major */
  logits: Float32Array;
}

export function validateUqeb(data: UqebData): void {
  const { members, samples, classes, labels, logits } = data;
  if (members < 1 || samples < 1) throw new Error("need at least one member and one sample");
  if (classes < 2) throw new Error(`need at least 2 classes, got ${classes}`);
  if (labels.length !== samples) {
    throw new Error(`label count ${labels.length} does not match sample count ${samples}`);
  }
  if (logits.length !== members * samples * classes) {
    throw new Error(
      `logit count ${logits.length} does not match ${members}*${samples}*${classes}`,
    );
  }
  for (let i = 0; i < labels.length; i++) {
    if (labels[i] >= classes) {
      throw new Error(`label ${labels[i]} at index ${i} out of range [0, ${classes})`);
    }
  }
  for (let i = 0; i < logits.length; i++) {
    if (!Number.isFinite(logits[i])) {
      throw new Error(`non-finite logit at flat index ${i}`);
    }
  }
}

export function encodeUqeb(data: UqebData): Uint8Array {
  validateUqeb(data);
  const { members, samples, classes, labels, logits } = data;
  const total = HEADER_SIZE + 4 * samples + 4 * logits.length;
  const out = new Uint8Array(total);
  const view = new DataView(out.buffer);
  for (let i = 0; i < 4; i++) out[i] = UQEB_MAGIC.charCodeAt(i);
  view.setUint16(4, UQEB_VERSION, true);
  view.setUint16(6, UQEB_DTYPE_F32, true);
  view.setBigUint64(8, BigInt(members), true);
  view.setBigUint64(16, BigInt(samples), true);
  view.setBigUint64(24, BigInt(classes), true);
  let off = HEADER_SIZE;
  for (let i = 0; i < labels.length; i++, off += 4) view.setUint32(off, labels[i], true);
  for (let i = 0; i < logits.length; i++, off += 4) view.setFloat32(off, logits[i], true);
  return out;
}

export function decodeUqeb(bytes: Uint8Array): UqebData {
  if (bytes.length < HEADER_SIZE) throw new Error("file too short for header");
  const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
  const magic = String.fromCharCode(bytes[0], bytes[1], bytes[2], bytes[3]);
  if (magic !== UQEB_MAGIC) throw new Error(`bad magic ${JSON.stringify(magic)}`);
  if (view.getUint16(4, true) !== UQEB_VERSION) throw new Error("unsupported format version");
  if (view.getUint16(6, true) !== UQEB_DTYPE_F32) throw new Error("unsupported dtype code");
  const members = Number(view.getBigUint64(8, true));
  const samples = Number(view.getBigUint64(16, true));
  const classes = Number(view.getBigUint64(24, true));
  const expected = HEADER_SIZE + 4 * samples + 4 * members * samples * classes;
  if (bytes.length < expected) throw new Error("truncated payload");
  if (bytes.length > expected) throw new Error("trailing bytes after payload");
  const labels = new Uint32Array(samples);
  let off = HEADER_SIZE;
  for (let i = 0; i < samples; i++, off += 4) labels[i] = view.getUint32(off, true);
  const logits = new Float32Array(members * samples * classes);
  for (let i = 0; i < logits.length; i++, off += 4) logits[i] = view.getFloat32(off, true);
  const data = { members, samples, classes, labels, logits };
  validateUqeb(data);
  return data;
}
