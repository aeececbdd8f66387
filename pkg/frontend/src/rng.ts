/**
 * Seeded RNG (splitmix-initialized mulberry32) with uniform and Gaussian
 * draws. Everything stochastic in the trainer flows through one of these so
 * a fixed seed reproduces runs exactly.
 */
export class Rng {
  private state: number

  constructor(seed: number) {
    this.state = seed >>> 0
    // scramble so that small seeds do not start in a low-entropy region
    for (let i = 0; i < 4; i++) this.next()
  }

  /** Uniform in [0, 1). */
  next(): number {
    this.state = (this.state + 0x6d2b79f5) >>> 0
    let t = this.state
    t = Math.imul(t ^ (t >>> 15), t | 1)
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61)
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296
  }

  uniform(lo: number, hi: number): number {
    return lo + (hi - lo) * this.next()
  }

  int(n: number): number {
    return Math.floor(this.next() * n)
  }

  /** Standard normal via Box-Muller. */
  gaussian(): number {
    let u = 0
    while (u === 0) u = this.next()
    const v = this.next()
    return Math.sqrt(-2 * Math.log(u)) * Math.cos(2 * Math.PI * v)
  }
}
