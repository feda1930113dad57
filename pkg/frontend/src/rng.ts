/**
 * Counter-based SplitMix64 generator, bit-identical to the core library.
 *
 * Draw i is mix64(base + GOLDEN * (i + 1)); there is no hidden state
 * beyond the counter, so sequences reproduce exactly across languages.
 */

const MASK64 = (1n << 64n) - 1n;
const GOLDEN = 0x9e3779b97f4a7c15n;
const STREAM_SALT = 0x3c6ef372fe94f82an;

export function mix64(z: bigint): bigint {
  z &= MASK64;
  z = ((z ^ (z >> 30n)) * 0xbf58476d1ce4e5b9n) & MASK64;
  z = ((z ^ (z >> 27n)) * 0x94d049bb133111ebn) & MASK64;
  return (z ^ (z >> 31n)) & MASK64;
}

export interface RngState {
  seed: bigint;
  stream: bigint;
}

export function deriveRng(master: RngState, purposeTag: bigint): RngState {
  const child = mix64((master.stream + GOLDEN) ^ mix64((purposeTag + GOLDEN) & MASK64));
  return { seed: master.seed, stream: child };
}

export class Rng {
  private base: bigint;
  private counter: bigint;

  constructor(state: RngState) {
    this.base = mix64(
      mix64((state.seed + GOLDEN) & MASK64) ^ mix64((state.stream + STREAM_SALT) & MASK64));
    this.counter = 0n;
  }

  nextU64(): bigint {
    this.counter += 1n;
    return mix64((this.base + GOLDEN * this.counter) & MASK64);
  }

  /** Uniform float in [0, 1) with 53 random bits. */
  uniform(): number {
    return Number(this.nextU64() >> 11n) * 2 ** -53;
  }

  randbelow(n: number): number {
    if (n <= 0) throw new RangeError("randbelow needs n >= 1");
    return Number(this.nextU64() % BigInt(n));
  }

  /** k draws without replacement (partial Fisher-Yates, order preserved). */
  sample<T>(items: readonly T[], k: number): T[] {
    const pool = items.slice();
    if (k > pool.length) {
      throw new RangeError(`cannot sample ${k} from ${pool.length} items`);
    }
    for (let i = 0; i < k; i++) {
      const j = i + this.randbelow(pool.length - i);
      [pool[i], pool[j]] = [pool[j], pool[i]];
    }
    return pool.slice(0, k);
  }
}

export function rngFor(seed: number | bigint, stream: number | bigint = 0n): Rng {
  return new Rng({ seed: BigInt(seed), stream: BigInt(stream) });
}
