/**
 * Pure array bindings for hierarchical instance mixing and twin-head
 * pseudo-label fusion.  Five operations, no file I/O, no training loop;
 * all functions are reentrant and never mutate their input buffers.
 */

export const VERSION = "0.1.0";

export {
  DataError, IGNORE_VALUE,
  type ImageView, type LabelView, type MaskView, type ProbView,
} from "./arrays.js";
export { Rng, type RngState, deriveRng, mix64, rngFor } from "./rng.js";
export {
  SOURCE, TARGET, type InstanceInfo, type InstanceMap,
  extractInstances, relabelDisjoint,
} from "./instances.js";
export { blend, himix } from "./mixing.js";
export { DEFAULT_TAU, confidenceFraction, fuseProbabilities, pseudoLabel } from "./fusion.js";
