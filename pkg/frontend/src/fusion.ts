/**
 * Twin-head probability fusion: elementwise max, argmax pseudo-labels and
 * the max-probability-threshold confidence fraction.
 */

import { DataError, LabelView, ProbView, checkProb } from "./arrays.js";

export const DEFAULT_TAU = 0.968;

/** Per-pixel, per-class max of the two head outputs (not renormalized). */
export function fuseProbabilities(p1: ProbView, p2Realigned: ProbView): ProbView {
  if (p1.height !== p2Realigned.height || p1.width !== p2Realigned.width
      || p1.channels !== p2Realigned.channels) {
    throw new DataError(
      `shape mismatch ${p1.height}x${p1.width}x${p1.channels} vs `
      + `${p2Realigned.height}x${p2Realigned.width}x${p2Realigned.channels}`);
  }
  checkProb(p1, "p1");
  checkProb(p2Realigned, "p2");
  const data = new Float32Array(p1.data.length);
  for (let i = 0; i < data.length; i++) {
    data[i] = Math.max(p1.data[i], p2Realigned.data[i]);
  }
  return { height: p1.height, width: p1.width, channels: p1.channels, data };
}

/** Argmax class per pixel; ties go to the lowest class index. */
export function pseudoLabel(p: ProbView): LabelView {
  checkProb(p, "probability map");
  const size = p.height * p.width;
  const out = new Uint8Array(size);
  for (let px = 0; px < size; px++) {
    const base = px * p.channels;
    let bestClass = 0;
    let bestValue = p.data[base];
    for (let c = 1; c < p.channels; c++) {
      const v = p.data[base + c];
      if (v > bestValue) {
        bestValue = v;
        bestClass = c;
      }
    }
    out[px] = bestClass;
  }
  return { height: p.height, width: p.width, numClasses: p.channels, data: out };
}

/** Share of pixels whose top probability strictly exceeds tau. */
export function confidenceFraction(p: ProbView, tau: number = DEFAULT_TAU): number {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw new DataError(`tau must be in (0, 1), got ${tau}`);
  }
  checkProb(p, "probability map");
  const size = p.height * p.width;
  // The core library compares float32 tops against a float32-rounded tau.
  const tau32 = Math.fround(tau);
  let confident = 0;
  for (let px = 0; px < size; px++) {
    const base = px * p.channels;
    let top = p.data[base];
    for (let c = 1; c < p.channels; c++) {
      if (p.data[base + c] > top) top = p.data[base + c];
    }
    if (top > tau32) confident++;
  }
  return confident / size;
}
