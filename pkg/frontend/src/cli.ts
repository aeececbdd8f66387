/**
 * Trainer CLI.
 *
 *   node dist/cli.js train --host 127.0.0.1 --port 5555 --n 16 \
 *       --episodes 200 --seed 1 --out runs/smoke
 *   node dist/cli.js export-masks --checkpoint runs/smoke/checkpoint.json \
 *       --audit <planner audit dir> --out masks/ [--act]
 */

import * as fs from "node:fs"
import * as path from "node:path"

import { loadAuditFrames } from "./auditObs.js"
import { DEFAULT_TRAIN, TrainConfig } from "./ddpg.js"
import { EnvClient } from "./envClient.js"
import { exportMask } from "./mask.js"
import { loadCheckpoint, train, writeCheckpoint, writeTrainingLog } from "./train.js"

function parseArgs(argv: string[]): Record<string, string | boolean> {
  const out: Record<string, string | boolean> = {}
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i]
    if (!arg.startsWith("--")) continue
    const key = arg.slice(2)
    if (i + 1 < argv.length && !argv[i + 1].startsWith("--")) {
      out[key] = argv[i + 1]
      i += 1
    } else {
      out[key] = true
    }
  }
  return out
}

async function cmdTrain(args: Record<string, string | boolean>): Promise<number> {
  const n = Number(args.n ?? 16)
  const cfg: TrainConfig = {
    ...DEFAULT_TRAIN,
    n,
    seed: Number(args.seed ?? 0),
    episodeBudget: Number(args.episodes ?? 200),
    batchSize: Number(args.batch ?? DEFAULT_TRAIN.batchSize),
    updateEvery: Number(args["update-every"] ?? DEFAULT_TRAIN.updateEvery),
    warmupSteps: Number(args.warmup ?? DEFAULT_TRAIN.warmupSteps),
  }
  const outDir = String(args.out ?? "runs/latest")
  fs.mkdirSync(outDir, { recursive: true })
  const client = new EnvClient()
  await client.connect(String(args.host ?? "127.0.0.1"), Number(args.port ?? 5555))
  const started = Date.now()
  const { agent, log } = await train(client, cfg, (e) => {
    console.log(`episode ${e.episode}: return ${e.return_.toFixed(2)} in ${e.steps} steps`)
  })
  await client.close()
  writeCheckpoint(path.join(outDir, "checkpoint.json"), agent)
  writeTrainingLog(path.join(outDir, "train_log.csv"), log)
  console.log(`trained ${log.length} episodes in ${((Date.now() - started) / 1000).toFixed(0)}s; `
    + `checkpoint and log written to ${outDir}`)
  return 0
}

function cmdExportMasks(args: Record<string, string | boolean>): number {
  const agent = loadCheckpoint(String(args.checkpoint))
  const outDir = String(args.out ?? "masks")
  fs.mkdirSync(outDir, { recursive: true })
  const withActions = Boolean(args.act)
  const actions: Array<{ frame: number; action: number[] }> = []
  let count = 0
  if (args.audit) {
    for (const frame of loadAuditFrames(String(args.audit))) {
      const fwd = agent.actor.forward(frame.obs)
      const tag = String(frame.index).padStart(4, "0")
      exportMask(path.join(outDir, `mask_${tag}.txt`), fwd.refined, frame.res)
      if (withActions) actions.push({ frame: frame.index, action: Array.from(fwd.action.data) })
      count += 1
    }
  } else if (args.obs) {
    const lines = fs.readFileSync(String(args.obs), "utf-8").split("\n").filter((l) => l.trim())
    const res = Number(args.res ?? 0.25)
    lines.forEach((line, idx) => {
      const obs = JSON.parse(line) as number[]
      const fwd = agent.actor.forward(obs)
      exportMask(path.join(outDir, `mask_${String(idx).padStart(4, "0")}.txt`),
                 fwd.refined, res)
      if (withActions) actions.push({ frame: idx, action: Array.from(fwd.action.data) })
      count += 1
    })
  } else {
    console.error("export-masks needs --audit <dir> or --obs <jsonl>")
    return 2
  }
  if (withActions) {
    fs.writeFileSync(path.join(outDir, "actions.json"),
                     JSON.stringify(actions, null, 1) + "\n", "utf-8")
  }
  console.log(`exported ${count} masks to ${outDir}`)
  return 0
}

async function main(): Promise<number> {
  const [command, ...rest] = process.argv.slice(2)
  const args = parseArgs(rest)
  if (command === "train") return cmdTrain(args)
  if (command === "export-masks") return cmdExportMasks(args)
  console.error("usage: cli.js <train|export-masks> [--flags]")
  return 2
}

main().then((code) => process.exit(code), (err) => {
  console.error(err)
  process.exit(1)
})
