/**
 * Deterministic counter-based random stream (SplitMix64), matching the
 * generator contract of the uqeval toolkit (see docs/rng.md in the repo
 * root): output i for seed s is mix64(s + (i+1) * GAMMA) mod 2^64, uniforms
 * are (x >> 11) * 2^-53, bounded integers are x mod n.
 */

const MASK64 = (1n << 64n) - 1n;
const GAMMA = 0x9e3779b97f4a7c15n;
const MULT1 = 0xbf58476d1ce4e5b9n;
const MULT2 = 0x94d049bb133111ebn;

function mix64(v: bigint): bigint {
  v &= MASK64;
  v = ((v ^ (v >> 30n)) * MULT1) & MASK64;
  v = ((v ^ (v >> 27n)) * MULT2) & MASK64;
  return v ^ (v >> 31n);
}

export class CounterRng {
  private seed: bigint;
  private counter: bigint;

  constructor(seed: number | bigint, counter: number | bigint = 0) {
    this.seed = BigInt(seed) & MASK64;
    this.counter = BigInt(counter);
    if (this.counter < 0n) throw new Error("counter must be non-negative");
  }

  /** Next raw 64-bit output. */
  raw(): bigint {
    this.counter += 1n;
    return mix64((this.seed + this.counter * GAMMA) & MASK64);
  }

  /** Uniform float64 in [0, 1). */
  uniform(): number {
    return Number(this.raw() >> 11n) * 2 ** -53;
  }

  /** Integer in [0, bound) by modular reduction. */
  integerBelow(bound: number): number {
    if (bound < 1 || !Number.isInteger(bound)) {
      throw new Error(`bound must be a positive integer, got ${bound}`);
    }
    return Number(this.raw() % BigInt(bound));
  }
}
