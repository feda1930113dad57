/**
 * Hierarchical instance mixing: selection, layering, mask reduction, blend.
 * Mirrors the core library operation for operation so masks and mixed
 * outputs are bit-identical for the same seed.
 */

import {
  DataError, ImageView, LabelView, MaskView, checkImage, checkLabel,
} from "./arrays.js";
import {
  InstanceMap, SOURCE, TARGET, domainRank, extractInstances, relabelDisjoint,
} from "./instances.js";
import { Rng } from "./rng.js";

interface Layer {
  instanceId: number;
  domain: string;
  pixelCount: number;
  pixels: Int32Array; // sorted flat row-major indices
}

/** Pick ceil(|K_s|/2) source instances uniformly without replacement. */
export function selectSourceInstances(inst: InstanceMap, rng: Rng): Set<number> {
  const ids = [...inst.table.keys()].sort((a, b) => a - b);
  if (ids.length === 0) throw new DataError("no source instances");
  for (const i of ids) {
    if (inst.table.get(i)!.domain !== SOURCE) {
      throw new DataError(`instance ${i} is not from the source domain`);
    }
  }
  const k = Math.ceil(ids.length / 2);
  return new Set(rng.sample(ids, k));
}

function instancePixelLists(inst: InstanceMap): Map<number, number[]> {
  const out = new Map<number, number[]>();
  for (const i of inst.table.keys()) out.set(i, []);
  for (let p = 0; p < inst.ids.length; p++) {
    const id = inst.ids[p];
    if (id !== 0) out.get(id)!.push(p);
  }
  return out;
}

export function buildLayerStack(
  source: InstanceMap, selected: Set<number>, target: InstanceMap,
): Layer[] {
  if (source.height !== target.height || source.width !== target.width) {
    throw new DataError(
      `shape mismatch ${source.height}x${source.width} vs ${target.height}x${target.width}`);
  }
  for (const i of selected) {
    if (!source.table.has(i)) throw new DataError(`selected ids not in source table: ${i}`);
  }
  const layers: Layer[] = [];
  const srcPixels = instancePixelLists(source);
  for (const i of [...selected].sort((a, b) => a - b)) {
    layers.push({
      instanceId: i, domain: SOURCE,
      pixelCount: source.table.get(i)!.pixelCount,
      pixels: Int32Array.from(srcPixels.get(i)!),
    });
  }
  const tgtPixels = instancePixelLists(target);
  for (const i of [...target.table.keys()].sort((a, b) => a - b)) {
    layers.push({
      instanceId: i, domain: TARGET,
      pixelCount: target.table.get(i)!.pixelCount,
      pixels: Int32Array.from(tgtPixels.get(i)!),
    });
  }
  // Bottom-to-top: descending count, ties (domain, id) ascending.
  layers.sort((a, b) =>
    b.pixelCount - a.pixelCount
    || domainRank(a.domain) - domainRank(b.domain)
    || a.instanceId - b.instanceId);
  return layers;
}

/** Winner per pixel: minimal (pixel count, domain, id) among covering layers. */
export function reduceToMask(layers: Layer[], height: number, width: number): MaskView {
  const size = height * width;
  const mask = new Uint8Array(size);
  const covered = new Uint8Array(size);
  // Paint from worst to best preference so the final write wins.
  const order = layers.slice().sort((a, b) =>
    b.pixelCount - a.pixelCount
    || domainRank(b.domain) - domainRank(a.domain)
    || b.instanceId - a.instanceId);
  for (const layer of order) {
    const v = layer.domain === SOURCE ? 1 : 0;
    for (const p of layer.pixels) {
      mask[p] = v;
      covered[p] = 1;
    }
  }
  for (let p = 0; p < size; p++) {
    if (!covered[p]) {
      throw new DataError(
        `incomplete coverage at pixel (${Math.floor(p / width)}, ${p % width})`);
    }
  }
  return { height, width, data: mask };
}

/** Exact per-pixel select: source values where the mask is set. */
export function blend(
  xs: ImageView, xt: ImageView, ys: LabelView, yhatT: LabelView, mask: MaskView,
): { image: ImageView; label: LabelView } {
  const dims = [xs, xt, ys, yhatT, mask].map((g) => `${g.height}x${g.width}`);
  if (new Set(dims).size !== 1) {
    throw new DataError(`shape mismatch among blend inputs: ${dims.join(", ")}`);
  }
  const size = mask.height * mask.width;
  const img = new Uint8Array(size * 3);
  const lbl = new Uint8Array(size);
  for (let p = 0; p < size; p++) {
    const src = mask.data[p] === 1;
    lbl[p] = src ? ys.data[p] : yhatT.data[p];
    const o = p * 3;
    const from = src ? xs.data : xt.data;
    img[o] = from[o];
    img[o + 1] = from[o + 1];
    img[o + 2] = from[o + 2];
  }
  return {
    image: { height: mask.height, width: mask.width, data: img },
    label: {
      height: mask.height, width: mask.width,
      numClasses: Math.max(ys.numClasses, yhatT.numClasses), data: lbl,
    },
  };
}

/** Full hierarchical instance mixing of a source/target pair. */
export function himix(
  xs: ImageView, ys: LabelView, xt: ImageView, yhatT: LabelView,
  connectivity: 4 | 8, rng: Rng,
): { image: ImageView; label: LabelView; mask: MaskView } {
  checkImage(xs, "source image");
  checkImage(xt, "target image");
  checkLabel(ys, "source label");
  checkLabel(yhatT, "target label");
  let instS = extractInstances(ys, connectivity, SOURCE);
  let instT = extractInstances(yhatT, connectivity, TARGET);
  [instS, instT] = relabelDisjoint(instS, instT);
  const selected = selectSourceInstances(instS, rng);
  const layers = buildLayerStack(instS, selected, instT);
  const mask = reduceToMask(layers, ys.height, ys.width);
  const { image, label } = blend(xs, xt, ys, yhatT, mask);
  return { image, label, mask };
}
