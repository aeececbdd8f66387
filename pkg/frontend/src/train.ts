/**
 * Training loop against the environment server: episode rollouts with
 * exploration noise, replay updates every few steps, a CSV return log and a
 * JSON checkpoint.
 */

import * as fs from "node:fs"
import * as path from "node:path"

import { DdpgAgent, TrainConfig } from "./ddpg.js"
import { EnvClient } from "./envClient.js"

export interface EpisodeLog {
  episode: number
  steps: number
  return_: number
  dist: number
  head: number
  stable: number
  grad: number
  criticLoss: number
}

export interface TrainResult {
  agent: DdpgAgent
  log: EpisodeLog[]
}

export async function train(client: EnvClient, cfg: TrainConfig,
                            onEpisode?: (log: EpisodeLog) => void): Promise<TrainResult> {
  const agent = new DdpgAgent(cfg)
  const log: EpisodeLog[] = []
  for (let episode = 0; episode < cfg.episodeBudget; episode++) {
    let reply = await client.reset()
    let obs = Float64Array.from(reply.obs)
    let done = false
    let steps = 0
    let totalReturn = 0
    const sums = { dist: 0, head: 0, stable: 0, grad: 0 }
    let lossAcc = 0
    let lossCount = 0
    while (!done) {
      const action = agent.ready()
        ? agent.explore(obs)
        : [agent.rng.uniform(-1, 1), agent.rng.uniform(-1, 1)] as [number, number]
      const step = await client.step(action)
      const nextObs = Float64Array.from(step.obs)
      agent.observe({
        obs, action: Float64Array.from(action), reward: step.reward,
        nextObs, done: step.done,
      })
      totalReturn += step.reward
      sums.dist += step.components.dist
      sums.head += step.components.head
      sums.stable += step.components.stable
      sums.grad += step.components.grad
      obs = nextObs
      done = step.done
      steps += 1
      if (agent.ready() && steps % cfg.updateEvery === 0) {
        lossAcc += agent.update()
        lossCount += 1
      }
    }
    const entry: EpisodeLog = {
      episode, steps, return_: totalReturn,
      dist: sums.dist, head: sums.head, stable: sums.stable, grad: sums.grad,
      criticLoss: lossCount ? lossAcc / lossCount : NaN,
    }
    log.push(entry)
    onEpisode?.(entry)
  }
  return { agent, log }
}

export function writeTrainingLog(file: string, log: EpisodeLog[]): void {
  const lines = ["episode,steps,return,dist,head,stable,grad,critic_loss"]
  for (const e of log) {
    lines.push([e.episode, e.steps, e.return_, e.dist, e.head, e.stable,
                e.grad, e.criticLoss].join(","))
  }
  fs.writeFileSync(file, lines.join("\n") + "\n", "utf-8")
}

export function writeCheckpoint(file: string, agent: DdpgAgent): void {
  fs.mkdirSync(path.dirname(file), { recursive: true })
  fs.writeFileSync(file, JSON.stringify(agent.checkpoint()), "utf-8")
}

export function loadCheckpoint(file: string): DdpgAgent {
  return DdpgAgent.fromCheckpoint(JSON.parse(fs.readFileSync(file, "utf-8")))
}
