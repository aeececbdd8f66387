/**
 * Ring-buffer experience replay for continuous actions.
 */

import { Rng } from "./rng.js"

export interface Transition {
  obs: Float64Array
  action: Float64Array
  reward: number
  nextObs: Float64Array
  done: boolean
}

export class ReplayBuffer {
  private readonly buffer: Transition[]
  private position = 0
  private filled = 0

  constructor(readonly capacity: number) {
    this.buffer = new Array<Transition>(capacity)
  }

  get size(): number {
    return this.filled
  }

  push(t: Transition): void {
    this.buffer[this.position] = t
    this.position = (this.position + 1) % this.capacity
    this.filled = Math.min(this.filled + 1, this.capacity)
  }

  sample(batchSize: number, rng: Rng): Transition[] {
    if (this.filled < batchSize) throw new Error("replay buffer underfilled")
    const batch: Transition[] = []
    for (let i = 0; i < batchSize; i++) {
      batch.push(this.buffer[rng.int(this.filled)])
    }
    return batch
  }
}
