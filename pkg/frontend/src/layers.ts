/**
 * Layer containers over the tensor ops: parameter registry, initializers,
 * Adam, and the CBAM channel/spatial attention blocks.
 */

import { Rng } from "./rng.js"
import {
  Tensor, add, channelPool, conv2d, dense, param, relu, scaleChannels,
  scaleSpatial, sigmoid, spatialMax, spatialMean,
} from "./tensor.js"

export interface ParamBag {
  [name: string]: Tensor
}

export function heInit(rng: Rng, fanIn: number): () => number {
  const bound = Math.sqrt(2 / fanIn)
  return () => rng.gaussian() * bound
}

export function uniformInit(rng: Rng, bound: number): () => number {
  return () => rng.uniform(-bound, bound)
}

export function denseLayer(bag: ParamBag, name: string, rng: Rng,
                           inDim: number, outDim: number,
                           finalBound?: number): (x: Tensor) => Tensor {
  const init = finalBound !== undefined
    ? uniformInit(rng, finalBound)
    : heInit(rng, inDim)
  const w = param([outDim, inDim], init)
  const b = param([outDim], () => 0)
  bag[`${name}.w`] = w
  bag[`${name}.b`] = b
  return (x: Tensor) => dense(w, b, x)
}

export function convLayer(bag: ParamBag, name: string, rng: Rng,
                          cin: number, cout: number,
                          kernel: number): (x: Tensor) => Tensor {
  const init = heInit(rng, cin * kernel * kernel)
  const k = param([cout, cin, kernel, kernel], init)
  const b = param([cout], () => 0)
  bag[`${name}.k`] = k
  bag[`${name}.b`] = b
  return (x: Tensor) => conv2d(k, b, x)
}

/**
 * Channel attention: average- and max-pooled channel descriptors through a
 * shared two-layer gate, sigmoid weights multiply the channels.
 */
export class ChannelAttention {
  private readonly fc1: (x: Tensor) => Tensor
  private readonly fc2: (x: Tensor) => Tensor
  lastGate: Tensor | null = null

  constructor(bag: ParamBag, name: string, rng: Rng, channels: number,
              reduction = 2) {
    const hidden = Math.max(1, Math.floor(channels / reduction))
    this.fc1 = denseLayer(bag, `${name}.fc1`, rng, channels, hidden)
    this.fc2 = denseLayer(bag, `${name}.fc2`, rng, hidden, channels)
  }

  apply(x: Tensor): Tensor {
    const avg = this.fc2(relu(this.fc1(spatialMean(x))))
    const max = this.fc2(relu(this.fc1(spatialMax(x))))
    const gate = sigmoid(add(avg, max))
    this.lastGate = gate
    return scaleChannels(x, gate)
  }
}

/**
 * Spatial attention: per-pixel channel mean/max stacked, convolved to one
 * map, sigmoid, multiplies every channel.
 */
export class SpatialAttention {
  private readonly conv: (x: Tensor) => Tensor
  lastGate: Tensor | null = null

  constructor(bag: ParamBag, name: string, rng: Rng, kernel = 7) {
    this.conv = convLayer(bag, `${name}.conv`, rng, 2, 1, kernel)
  }

  apply(x: Tensor): Tensor {
    const gate = sigmoid(this.conv(channelPool(x)))
    this.lastGate = gate
    return scaleSpatial(x, gate)
  }
}

/** Sequential channel-then-spatial refinement. */
export class Cbam {
  readonly channel: ChannelAttention
  readonly spatial: SpatialAttention

  constructor(bag: ParamBag, name: string, rng: Rng, channels: number) {
    this.channel = new ChannelAttention(bag, `${name}.ca`, rng, channels)
    this.spatial = new SpatialAttention(bag, `${name}.sa`, rng)
  }

  apply(x: Tensor): Tensor {
    return this.spatial.apply(this.channel.apply(x))
  }
}

/** Adam over a parameter bag. */
export class Adam {
  private readonly params: Tensor[]
  private readonly m: Float64Array[]
  private readonly v: Float64Array[]
  private t = 0

  constructor(params: Tensor[], private readonly lr: number,
              private readonly beta1 = 0.9, private readonly beta2 = 0.999,
              private readonly eps = 1e-8) {
    this.params = params
    this.m = params.map((p) => new Float64Array(p.size))
    this.v = params.map((p) => new Float64Array(p.size))
  }

  step(): void {
    this.t += 1
    const bc1 = 1 - Math.pow(this.beta1, this.t)
    const bc2 = 1 - Math.pow(this.beta2, this.t)
    for (let k = 0; k < this.params.length; k++) {
      const p = this.params[k]
      const g = p.grad
      if (!g) continue
      const m = this.m[k]
      const v = this.v[k]
      for (let i = 0; i < p.size; i++) {
        m[i] = this.beta1 * m[i] + (1 - this.beta1) * g[i]
        v[i] = this.beta2 * v[i] + (1 - this.beta2) * g[i] * g[i]
        p.data[i] -= this.lr * (m[i] / bc1) / (Math.sqrt(v[i] / bc2) + this.eps)
      }
    }
  }
}

export function zeroGrads(bag: ParamBag): void {
  for (const name of Object.keys(bag)) bag[name].zeroGrad()
}

export function paramList(bag: ParamBag): Tensor[] {
  return Object.keys(bag).sort().map((k) => bag[k])
}

export function copyParams(src: ParamBag, dst: ParamBag): void {
  for (const name of Object.keys(src)) dst[name].data.set(src[name].data)
}

export function softUpdate(src: ParamBag, dst: ParamBag, tau: number): void {
  for (const name of Object.keys(src)) {
    const s = src[name].data
    const d = dst[name].data
    for (let i = 0; i < d.length; i++) d[i] = (1 - tau) * d[i] + tau * s[i]
  }
}
