/**
 * Actor and critic networks.
 *
 * The actor has two branches: the elevation branch convolves the normalized
 * elevation map to 8 channels, refines them with channel-then-spatial
 * attention and a second conv (the refined features are what the attention
 * mask sums over), then reduces to one channel; the pose branch is a fully
 * connected stack over [d_goal, alpha_goal, alpha_relative, |roll|,
 * |pitch|] ++ heading-gradient vector (n/2 + 5 inputs). The fused head ends
 * in tanh, giving commands in [-1, 1]^2. Hidden activations are ReLU.
 *
 * The critic is a fully connected stack over [observation ++ action] with a
 * linear scalar output.
 */

import { Cbam, ParamBag, convLayer, denseLayer } from "./layers.js"
import { Rng } from "./rng.js"
import { Tensor, concat, relu, reshape, tanh, tensor } from "./tensor.js"

export interface ActorConfig {
  n: number
  channels: number
  poseWidths: number[]
  fusedWidths: number[]
}

export const DEFAULT_ACTOR: Omit<ActorConfig, "n"> = {
  channels: 8,
  poseWidths: [64, 64],
  fusedWidths: [128, 64],
}

export function obsLength(n: number): number {
  return n * n + 5 + n / 2
}

export interface ActorOutput {
  action: Tensor
  refined: Tensor // [channels, n, n]
}

export class Actor {
  readonly bag: ParamBag = {}
  readonly cfg: ActorConfig
  private readonly conv1: (x: Tensor) => Tensor
  private readonly conv2: (x: Tensor) => Tensor
  private readonly reduce: (x: Tensor) => Tensor
  private readonly cbam: Cbam
  private readonly pose: Array<(x: Tensor) => Tensor>
  private readonly fused: Array<(x: Tensor) => Tensor>
  private readonly head: (x: Tensor) => Tensor

  constructor(cfg: ActorConfig, rng: Rng) {
    this.cfg = cfg
    const c = cfg.channels
    this.conv1 = convLayer(this.bag, "conv1", rng, 1, c, 3)
    this.cbam = new Cbam(this.bag, "cbam", rng, c)
    this.conv2 = convLayer(this.bag, "conv2", rng, c, c, 3)
    this.reduce = convLayer(this.bag, "reduce", rng, c, 1, 1)
    this.pose = []
    let width = 5 + cfg.n / 2
    cfg.poseWidths.forEach((w, i) => {
      this.pose.push(denseLayer(this.bag, `pose${i}`, rng, width, w))
      width = w
    })
    this.fused = []
    let fusedWidth = cfg.n * cfg.n + width
    cfg.fusedWidths.forEach((w, i) => {
      this.fused.push(denseLayer(this.bag, `fused${i}`, rng, fusedWidth, w))
      fusedWidth = w
    })
    this.head = denseLayer(this.bag, "head", rng, fusedWidth, 2, 3e-3)
  }

  /** Split a flat observation vector into branch inputs. */
  splitObs(obs: ArrayLike<number>): { elev: Tensor; pose: Tensor } {
    const n = this.cfg.n
    if (obs.length !== obsLength(n)) {
      throw new Error(`observation length ${obs.length} != ${obsLength(n)}`)
    }
    const elev = tensor([1, n, n])
    for (let i = 0; i < n * n; i++) elev.data[i] = obs[i]
    const pose = tensor([5 + n / 2])
    for (let i = 0; i < pose.size; i++) pose.data[i] = obs[n * n + i]
    return { elev, pose }
  }

  forward(obs: ArrayLike<number>): ActorOutput {
    const { elev, pose } = this.splitObs(obs)
    let f = relu(this.conv1(elev))
    f = this.cbam.apply(f)
    const refined = relu(this.conv2(f))
    const reduced = relu(this.reduce(refined))
    let p = pose
    for (const layer of this.pose) p = relu(layer(p))
    let z = concat([reshape(reduced, [this.cfg.n * this.cfg.n]), p])
    for (const layer of this.fused) z = relu(layer(z))
    return { action: tanh(this.head(z)), refined }
  }

  act(obs: ArrayLike<number>): [number, number] {
    const { action } = this.forward(obs)
    return [action.data[0], action.data[1]]
  }

  gates(): { channel: Tensor | null; spatial: Tensor | null } {
    return {
      channel: this.cbam.channel.lastGate,
      spatial: this.cbam.spatial.lastGate,
    }
  }
}

export interface CriticConfig {
  obsDim: number
  widths: number[]
}

export const DEFAULT_CRITIC_WIDTHS = [128, 64]

export class Critic {
  readonly bag: ParamBag = {}
  private readonly stack: Array<(x: Tensor) => Tensor>
  private readonly head: (x: Tensor) => Tensor

  constructor(cfg: CriticConfig, rng: Rng) {
    this.stack = []
    let width = cfg.obsDim + 2
    cfg.widths.forEach((w, i) => {
      this.stack.push(denseLayer(this.bag, `fc${i}`, rng, width, w))
      width = w
    })
    this.head = denseLayer(this.bag, "q", rng, width, 1, 3e-4)
  }

  /** Q(s, a); ``action`` may be a plain vector or a differentiable tensor. */
  forward(obs: ArrayLike<number>, action: Tensor): Tensor {
    const s = tensor([obs.length], obs)
    let z = concat([s, action])
    for (const layer of this.stack) z = relu(layer(z))
    return this.head(z)
  }
}
