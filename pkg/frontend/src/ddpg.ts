/**
 * DDPG: actor-critic with target networks, soft updates, Gaussian
 * exploration noise and experience replay. Fully seeded.
 */

import { Adam, copyParams, paramList, softUpdate, zeroGrads } from "./layers.js"
import { Actor, ActorConfig, Critic, DEFAULT_ACTOR, DEFAULT_CRITIC_WIDTHS, obsLength } from "./network.js"
import { ReplayBuffer, Transition } from "./replay.js"
import { Rng } from "./rng.js"
import { Tensor, backward, meanAll, scale, square, startTape, stopTape, sub, tensor } from "./tensor.js"

export interface TrainConfig {
  n: number
  replayCapacity: number
  batchSize: number
  actorLr: number
  criticLr: number
  discount: number
  softUpdateRate: number
  noiseSigma: number
  episodeBudget: number
  warmupSteps: number
  updateEvery: number
  seed: number
  actor: Omit<ActorConfig, "n">
  criticWidths: number[]
}

export const DEFAULT_TRAIN: Omit<TrainConfig, "n" | "seed" | "episodeBudget"> = {
  replayCapacity: 100_000,
  batchSize: 64,
  actorLr: 1e-4,
  criticLr: 1e-3,
  discount: 0.99,
  softUpdateRate: 5e-3,
  noiseSigma: 0.2,
  warmupSteps: 200,
  updateEvery: 1,
  actor: DEFAULT_ACTOR,
  criticWidths: DEFAULT_CRITIC_WIDTHS,
}

export class DdpgAgent {
  readonly cfg: TrainConfig
  readonly actor: Actor
  readonly critic: Critic
  readonly actorTarget: Actor
  readonly criticTarget: Critic
  readonly replay: ReplayBuffer
  readonly rng: Rng
  private readonly actorOpt: Adam
  private readonly criticOpt: Adam

  constructor(cfg: TrainConfig) {
    this.cfg = cfg
    this.rng = new Rng(cfg.seed)
    const actorCfg: ActorConfig = { n: cfg.n, ...cfg.actor }
    const criticCfg = { obsDim: obsLength(cfg.n), widths: cfg.criticWidths }
    this.actor = new Actor(actorCfg, this.rng)
    this.critic = new Critic(criticCfg, this.rng)
    this.actorTarget = new Actor(actorCfg, this.rng)
    this.criticTarget = new Critic(criticCfg, this.rng)
    copyParams(this.actor.bag, this.actorTarget.bag)
    copyParams(this.critic.bag, this.criticTarget.bag)
    this.actorOpt = new Adam(paramList(this.actor.bag), cfg.actorLr)
    this.criticOpt = new Adam(paramList(this.critic.bag), cfg.criticLr)
    this.replay = new ReplayBuffer(cfg.replayCapacity)
  }

  /** Policy action with exploration noise, clipped to [-1, 1]. */
  explore(obs: ArrayLike<number>): [number, number] {
    const [a0, a1] = this.actor.act(obs)
    const clip = (v: number) => Math.min(1, Math.max(-1, v))
    return [clip(a0 + this.cfg.noiseSigma * this.rng.gaussian()),
            clip(a1 + this.cfg.noiseSigma * this.rng.gaussian())]
  }

  observe(t: Transition): void {
    this.replay.push(t)
  }

  ready(): boolean {
    return this.replay.size >= Math.max(this.cfg.batchSize, this.cfg.warmupSteps)
  }

  /** One gradient update on a sampled batch; returns the critic loss. */
  update(): number {
    const batch = this.replay.sample(this.cfg.batchSize, this.rng)
    const gamma = this.cfg.discount

    // targets (no gradients needed)
    const targets = batch.map((t) => {
      if (t.done) return t.reward
      const nextAction = this.actorTarget.forward(t.nextObs).action
      const q = this.criticTarget.forward(t.nextObs, nextAction)
      return t.reward + gamma * q.data[0]
    })

    // critic regression toward the bootstrapped targets
    zeroGrads(this.critic.bag)
    zeroGrads(this.actor.bag)
    let criticLoss = 0
    for (let i = 0; i < batch.length; i++) {
      startTape()
      const action = tensor([2], batch[i].action)
      const q = this.critic.forward(batch[i].obs, action)
      const err = sub(q, tensor([1], [targets[i]]))
      const loss = scale(meanAll(square(err)), 1 / batch.length)
      backward(loss)
      stopTape()
      criticLoss += loss.item() * batch.length
    }
    this.criticOpt.step()

    // actor ascends Q(s, mu(s)); critic gradients are discarded
    zeroGrads(this.critic.bag)
    zeroGrads(this.actor.bag)
    for (const t of batch) {
      startTape()
      const action = this.actor.forward(t.obs).action
      const q = this.critic.forward(t.obs, action)
      const loss = scale(q, -1 / batch.length)
      backward(loss)
      stopTape()
    }
    this.actorOpt.step()
    zeroGrads(this.critic.bag)

    softUpdate(this.actor.bag, this.actorTarget.bag, this.cfg.softUpdateRate)
    softUpdate(this.critic.bag, this.criticTarget.bag, this.cfg.softUpdateRate)
    return criticLoss / batch.length
  }

  checkpoint(): object {
    const dump = (bag: Record<string, Tensor>) => {
      const out: Record<string, number[]> = {}
      for (const k of Object.keys(bag)) out[k] = Array.from(bag[k].data)
      return out
    }
    return {
      config: this.cfg,
      actor: dump(this.actor.bag),
      critic: dump(this.critic.bag),
    }
  }

  static fromCheckpoint(data: any): DdpgAgent {
    const agent = new DdpgAgent(data.config as TrainConfig)
    const load = (bag: Record<string, Tensor>, saved: Record<string, number[]>) => {
      for (const k of Object.keys(bag)) {
        if (!(k in saved)) throw new Error(`checkpoint missing parameter ${k}`)
        bag[k].data.set(saved[k])
      }
    }
    load(agent.actor.bag, data.actor)
    load(agent.critic.bag, data.critic)
    copyParams(agent.actor.bag, agent.actorTarget.bag)
    copyParams(agent.critic.bag, agent.criticTarget.bag)
    return agent
  }
}
