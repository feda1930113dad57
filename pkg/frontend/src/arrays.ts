/**
 * Array views over contiguous row-major buffers.
 *
 * Labels and masks are 2D uint8 grids, images are (H, W, 3) uint8, and
 * probability maps are (H, W, C) float32 with the class axis fastest.
 * The binding functions never mutate these buffers.
 */

export class DataError extends Error {}

export const IGNORE_VALUE = 255;

export interface LabelView {
  height: number;
  width: number;
  numClasses: number;
  data: Uint8Array; // length height * width
}

export interface ImageView {
  height: number;
  width: number;
  data: Uint8Array; // length height * width * 3, RGB interleaved
}

export interface ProbView {
  height: number;
  width: number;
  channels: number;
  data: Float32Array; // length height * width * channels
}

export interface MaskView {
  height: number;
  width: number;
  data: Uint8Array; // 0 = target pixel, 1 = source pixel
}

export function checkLabel(y: LabelView, name: string): void {
  if (y.height < 1 || y.width < 1) {
    throw new DataError(`${name}: dims ${y.height}x${y.width} must be >= 1`);
  }
  if (y.data.length !== y.height * y.width) {
    throw new DataError(`${name}: buffer length ${y.data.length} != ${y.height * y.width}`);
  }
  if (y.numClasses < 1 || y.numClasses > 255) {
    throw new DataError(`${name}: num_classes ${y.numClasses} out of range`);
  }
  for (let i = 0; i < y.data.length; i++) {
    const v = y.data[i];
    if (v !== IGNORE_VALUE && v >= y.numClasses) {
      throw new DataError(`${name}: class index out of range: ${v} >= ${y.numClasses}`);
    }
  }
}

export function checkImage(x: ImageView, name: string): void {
  if (x.height < 1 || x.width < 1) {
    throw new DataError(`${name}: dims ${x.height}x${x.width} must be >= 1`);
  }
  if (x.data.length !== x.height * x.width * 3) {
    throw new DataError(`${name}: buffer length ${x.data.length} != ${x.height * x.width * 3}`);
  }
}

export function checkProb(p: ProbView, name: string): void {
  if (p.height < 1 || p.width < 1 || p.channels < 1) {
    throw new DataError(`${name}: dims ${p.height}x${p.width}x${p.channels} must be >= 1`);
  }
  if (p.data.length !== p.height * p.width * p.channels) {
    throw new DataError(
      `${name}: buffer length ${p.data.length} != ${p.height * p.width * p.channels}`);
  }
  for (let i = 0; i < p.data.length; i++) {
    const v = p.data[i];
    if (!(v >= 0.0 && v <= 1.0)) {
      throw new DataError(`${name}: probability out of [0,1] at ${i}: ${v}`);
    }
  }
}
