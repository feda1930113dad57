import { readFileSync } from "node:fs";
import { join } from "node:path";
import { fileURLToPath } from "node:url";

import type { ImageView, LabelView, ProbView } from "../src/arrays.js";

const GOLDEN = join(fileURLToPath(new URL(".", import.meta.url)), "golden");

export function goldenBytes(...parts: string[]): Buffer {
  return readFileSync(join(GOLDEN, ...parts));
}

export function goldenText(...parts: string[]): string {
  return goldenBytes(...parts).toString("utf-8");
}

function header(buf: Buffer, magic: string): { h: number; w: number } {
  if (buf.subarray(0, 4).toString("latin1") !== magic) {
    throw new Error(`expected ${magic} container`);
  }
  return { h: buf.readUInt32LE(4), w: buf.readUInt32LE(8) };
}

export function readLabel(buf: Buffer, numClasses: number): LabelView {
  const { h, w } = header(buf, "LBL1");
  return { height: h, width: w, numClasses, data: new Uint8Array(buf.subarray(12)) };
}

export function readImage(buf: Buffer): ImageView {
  const { h, w } = header(buf, "IMG1");
  return { height: h, width: w, data: new Uint8Array(buf.subarray(12)) };
}

export function readIds(buf: Buffer): Int32Array {
  const { h, w } = header(buf, "I321");
  const body = buf.subarray(12);
  const ids = new Int32Array(h * w);
  for (let i = 0; i < ids.length; i++) ids[i] = body.readInt32LE(i * 4);
  return ids;
}

export function readPmap(buf: Buffer): ProbView {
  if (buf.subarray(0, 4).toString("latin1") !== "PMAP") {
    throw new Error("expected PMAP container");
  }
  const h = buf.readUInt32LE(4);
  const w = buf.readUInt32LE(8);
  const c = buf.readUInt32LE(12);
  const body = buf.subarray(16);
  const data = new Float32Array(h * w * c);
  for (let i = 0; i < data.length; i++) data[i] = body.readFloatLE(i * 4);
  return { height: h, width: w, channels: c, data };
}

export function labelBytes(y: LabelView): Buffer {
  const out = Buffer.alloc(12 + y.data.length);
  out.write("LBL1", 0, "latin1");
  out.writeUInt32LE(y.height, 4);
  out.writeUInt32LE(y.width, 8);
  out.set(y.data, 12);
  return out;
}

export function maskBytes(m: { height: number; width: number; data: Uint8Array }): Buffer {
  return labelBytes({ ...m, numClasses: 2 });
}

export function imageBytes(x: ImageView): Buffer {
  const out = Buffer.alloc(12 + x.data.length);
  out.write("IMG1", 0, "latin1");
  out.writeUInt32LE(x.height, 4);
  out.writeUInt32LE(x.width, 8);
  out.set(x.data, 12);
  return out;
}

export function pmapBytes(p: ProbView): Buffer {
  const out = Buffer.alloc(16 + p.data.length * 4);
  out.write("PMAP", 0, "latin1");
  out.writeUInt32LE(p.height, 4);
  out.writeUInt32LE(p.width, 8);
  out.writeUInt32LE(p.channels, 12);
  for (let i = 0; i < p.data.length; i++) out.writeFloatLE(p.data[i], 16 + i * 4);
  return out;
}

/** Shortest round-trip decimal with a trailing .0 on integers (repr-style). */
export function floatRepr(x: number): string {
  const s = String(x);
  return Number.isInteger(x) && !s.includes("e") ? `${s}.0` : s;
}
