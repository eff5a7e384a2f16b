/**
 * HGEM embedding file writer/reader.
 *
 * Little-endian: magic "HGEM", u32 version = 1, u32 count, u32 dim,
 * then count records of {u32 codepoint, dim x float32}, sorted
 * ascending by codepoint. Vectors must be unit-norm.
 */
import * as fs from "fs";

export interface HgemEntry {
  codepoint: number;
  values: Float32Array;
}

const MAGIC = "HGEM";
const VERSION = 1;

export function writeHgem(filePath: string, entries: HgemEntry[]): void {
  if (entries.length === 0) throw new Error("cannot write empty HGEM file");
  const dim = entries[0].values.length;
  const sorted = [...entries].sort((a, b) => a.codepoint - b.codepoint);
  for (let i = 1; i < sorted.length; i++) {
    if (sorted[i].codepoint === sorted[i - 1].codepoint) {
      throw new Error(`duplicate codepoint ${sorted[i].codepoint}`);
    }
  }
  const record = 4 + 4 * dim;
  const buffer = Buffer.alloc(16 + sorted.length * record);
  buffer.write(MAGIC, 0, "ascii");
  buffer.writeUInt32LE(VERSION, 4);
  buffer.writeUInt32LE(sorted.length, 8);
  buffer.writeUInt32LE(dim, 12);
  let offset = 16;
  for (const entry of sorted) {
    if (entry.values.length !== dim) {
      throw new Error("mixed embedding dimensions");
    }
    const n = Math.hypot(...entry.values);
    if (!Number.isFinite(n) || Math.abs(n - 1) > 1e-3) {
      throw new Error(
        `vector for codepoint ${entry.codepoint} is not unit length (${n})`,
      );
    }
    buffer.writeUInt32LE(entry.codepoint, offset);
    offset += 4;
    for (const v of entry.values) {
      buffer.writeFloatLE(v, offset);
      offset += 4;
    }
  }
  fs.writeFileSync(filePath, buffer);
}

export function readHgem(filePath: string): HgemEntry[] {
  const buffer = fs.readFileSync(filePath);
  if (buffer.length < 16 || buffer.toString("ascii", 0, 4) !== MAGIC) {
    throw new Error(`bad magic in ${filePath}`);
  }
  const version = buffer.readUInt32LE(4);
  if (version !== VERSION) throw new Error(`unsupported HGEM version ${version}`);
  const count = buffer.readUInt32LE(8);
  const dim = buffer.readUInt32LE(12);
  const record = 4 + 4 * dim;
  if (buffer.length !== 16 + count * record) {
    throw new Error(`truncated HGEM file ${filePath}`);
  }
  const entries: HgemEntry[] = [];
  let offset = 16;
  for (let i = 0; i < count; i++) {
    const codepoint = buffer.readUInt32LE(offset);
    offset += 4;
    const values = new Float32Array(dim);
    for (let j = 0; j < dim; j++) {
      values[j] = buffer.readFloatLE(offset);
      offset += 4;
    }
    entries.push({ codepoint, values });
  }
  return entries;
}
