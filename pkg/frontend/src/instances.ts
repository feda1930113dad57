/**
 * Connected-component labeling, matching the core library's canonical
 * numbering: dense ids 1..N by first occurrence in row-major scan order.
 */

import { DataError, IGNORE_VALUE, LabelView, checkLabel } from "./arrays.js";

export const SOURCE = "source";
export const TARGET = "target";

export function domainRank(domain: string): number {
  if (domain === SOURCE) return 0;
  if (domain === TARGET) return 1;
  throw new DataError(`unknown domain tag '${domain}'`);
}

export interface InstanceInfo {
  classIndex: number;
  domain: string;
  pixelCount: number;
}

export interface InstanceMap {
  height: number;
  width: number;
  ids: Int32Array; // 0 = ignore
  table: Map<number, InstanceInfo>;
}

function find(parent: Int32Array, x: number): number {
  let root = x;
  while (parent[root] !== root) root = parent[root];
  while (parent[x] !== root) {
    const nxt = parent[x];
    parent[x] = root;
    x = nxt;
  }
  return root;
}

function union(parent: Int32Array, a: number, b: number): void {
  const ra = find(parent, a);
  const rb = find(parent, b);
  if (ra < rb) parent[rb] = ra;
  else if (rb < ra) parent[ra] = rb;
}

export function extractInstances(
  y: LabelView, connectivity: 4 | 8 = 4, domain: string = SOURCE,
): InstanceMap {
  checkLabel(y, "label");
  if (connectivity !== 4 && connectivity !== 8) {
    throw new DataError(`connectivity must be 4 or 8, got ${connectivity}`);
  }
  domainRank(domain);
  const { height: h, width: w } = y;
  const cls = y.data;
  const eight = connectivity === 8;
  const out = new Int32Array(h * w);
  const parent = new Int32Array(h * w + 1);
  let nextLabel = 1;

  // Pass 1: provisional labels from already-scanned neighbors.
  for (let i = 0; i < h; i++) {
    for (let j = 0; j < w; j++) {
      const p = i * w + j;
      const c = cls[p];
      if (c === IGNORE_VALUE) continue;
      let best = 0;
      if (j > 0 && cls[p - 1] === c) best = out[p - 1];
      if (i > 0) {
        if (cls[p - w] === c) {
          const lbl = out[p - w];
          if (best === 0 || lbl < best) best = lbl;
        }
        if (eight) {
          if (j > 0 && cls[p - w - 1] === c) {
            const lbl = out[p - w - 1];
            if (best === 0 || lbl < best) best = lbl;
          }
          if (j < w - 1 && cls[p - w + 1] === c) {
            const lbl = out[p - w + 1];
            if (best === 0 || lbl < best) best = lbl;
          }
        }
      }
      if (best === 0) {
        parent[nextLabel] = nextLabel;
        out[p] = nextLabel;
        nextLabel++;
      } else {
        out[p] = best;
        if (j > 0 && cls[p - 1] === c) union(parent, best, out[p - 1]);
        if (i > 0) {
          if (cls[p - w] === c) union(parent, best, out[p - w]);
          if (eight) {
            if (j > 0 && cls[p - w - 1] === c) union(parent, best, out[p - w - 1]);
            if (j < w - 1 && cls[p - w + 1] === c) union(parent, best, out[p - w + 1]);
          }
        }
      }
    }
  }

  // Pass 2: resolve roots and renumber densely by first occurrence.
  const dense = new Int32Array(nextLabel);
  let count = 0;
  for (let p = 0; p < h * w; p++) {
    const lbl = out[p];
    if (lbl === 0) continue;
    const root = find(parent, lbl);
    if (dense[root] === 0) {
      count++;
      dense[root] = count;
    }
    out[p] = dense[root];
  }

  const table = new Map<number, InstanceInfo>();
  for (let p = 0; p < h * w; p++) {
    const id = out[p];
    if (id === 0) continue;
    const info = table.get(id);
    if (info) info.pixelCount++;
    else table.set(id, { classIndex: cls[p], domain, pixelCount: 1 });
  }
  return { height: h, width: w, ids: out, table };
}

/** Shift b's ids above a's so the two id ranges never collide. */
export function relabelDisjoint(a: InstanceMap, b: InstanceMap): [InstanceMap, InstanceMap] {
  const offset = a.table.size === 0 ? 0 : Math.max(...a.table.keys());
  if (offset === 0 || b.table.size === 0) return [a, b];
  const ids = new Int32Array(b.ids.length);
  for (let p = 0; p < ids.length; p++) ids[p] = b.ids[p] === 0 ? 0 : b.ids[p] + offset;
  const table = new Map<number, InstanceInfo>();
  for (const [i, info] of b.table) table.set(i + offset, { ...info });
  return [a, { height: b.height, width: b.width, ids, table }];
}
