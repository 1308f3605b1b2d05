/** FMAP binary field maps: "FMAP" magic, u32-LE width/height, f32-LE row-major. */
import * as fs from "node:fs";

export interface FieldMap {
  width: number;
  height: number;
  /** Row-major values (float64 in memory, float32 on disk). */
  values: Float64Array;
}

const MAGIC = "FMAP";

export function encodeFmap(field: FieldMap): Buffer {
  const buf = Buffer.alloc(12 + 4 * field.width * field.height);
  buf.write(MAGIC, 0, "latin1");
  buf.writeUInt32LE(field.width, 4);
  buf.writeUInt32LE(field.height, 8);
  for (let i = 0; i < field.values.length; i++) {
    buf.writeFloatLE(field.values[i], 12 + 4 * i);
  }
  return buf;
}

export function decodeFmap(data: Buffer, name = "<buffer>"): FieldMap {
  if (data.length < 12 || data.toString("latin1", 0, 4) !== MAGIC) {
    throw new Error(`${name}: not an FMAP file (bad magic)`);
  }
  const width = data.readUInt32LE(4);
  const height = data.readUInt32LE(8);
  const expected = 12 + 4 * width * height;
  if (data.length !== expected) {
    throw new Error(`${name}: FMAP payload size mismatch (expected ${expected}, got ${data.length})`);
  }
  const values = new Float64Array(width * height);
  for (let i = 0; i < values.length; i++) {
    values[i] = data.readFloatLE(12 + 4 * i);
  }
  return { width, height, values };
}

export function readFmap(path: string): FieldMap {
  return decodeFmap(fs.readFileSync(path), path);
}

export function writeFmap(field: FieldMap, path: string): void {
  const tmp = path + ".tmp";
  fs.writeFileSync(tmp, encodeFmap(field));
  fs.renameSync(tmp, path);
}
