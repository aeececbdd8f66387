/**
 * Rebuild observation vectors from planner audit dumps.
 *
 * An audit episode directory holds episode.json (scenario, trajectory) and
 * per-frame grids; the observation fed to the network is reconstructed the
 * same way the environment server builds it: infilled raw elevation
 * normalized by clearance, pose/goal scalars, and the forward
 * heading-gradient vector.
 */

import * as fs from "node:fs"
import * as path from "node:path"

import { readGrid } from "./gridio.js"

export interface AuditFrame {
  index: number
  obs: Float64Array
  res: number
  n: number
}

function wrapAngle(a: number): number {
  let r = (a + Math.PI) % (2 * Math.PI)
  if (r <= 0) r += 2 * Math.PI
  return r - Math.PI
}

/** Nearest sensed neighbor infill; ties break to smaller row then column. */
export function infill(values: Float64Array, n: number): Float64Array {
  const known: Array<[number, number]> = []
  for (let r = 0; r < n; r++) {
    for (let c = 0; c < n; c++) {
      if (!Number.isNaN(values[r * n + c])) known.push([r, c])
    }
  }
  if (known.length === 0) throw new Error("grid has no sensed cells")
  const out = Float64Array.from(values)
  for (let r = 0; r < n; r++) {
    for (let c = 0; c < n; c++) {
      if (!Number.isNaN(values[r * n + c])) continue
      let best = Infinity
      let bestVal = 0
      for (const [kr, kc] of known) {
        const d = (kr - r) * (kr - r) + (kc - c) * (kc - c)
        if (d < best) {
          best = d
          bestVal = values[kr * n + kc]
        }
      }
      out[r * n + c] = bestVal
    }
  }
  return out
}

/** Clearance shift with the relief offset on cells above clearance. */
export function normalizeElevation(values: Float64Array, clearance: number): Float64Array {
  let lo = Infinity
  let hi = -Infinity
  for (const v of values) {
    if (v < lo) lo = v
    if (v > hi) hi = v
  }
  const relief = 0.1 * (hi - lo)
  const out = new Float64Array(values.length)
  for (let i = 0; i < values.length; i++) {
    const shifted = values[i] - clearance
    out[i] = shifted > 0 ? shifted + relief : shifted
  }
  return out
}

/** Forward-column gradient magnitudes, far to near (length n/2). */
export function headingGradient(values: Float64Array, n: number, res: number): Float64Array {
  const h = n / 2
  const grad = (r: number, c: number): number => {
    const at = (rr: number, cc: number) => values[rr * n + cc]
    const di = r === 0 ? (at(1, c) - at(0, c)) / res
      : r === n - 1 ? (at(n - 1, c) - at(n - 2, c)) / res
      : (at(r + 1, c) - at(r - 1, c)) / (2 * res)
    const dj = c === 0 ? (at(r, 1) - at(r, 0)) / res
      : c === n - 1 ? (at(r, n - 1) - at(r, n - 2)) / res
      : (at(r, c + 1) - at(r, c - 1)) / (2 * res)
    return Math.hypot(di, dj)
  }
  const out = new Float64Array(h)
  for (let k = 0; k < h; k++) out[k] = grad(n - 1 - k, h)
  return out
}

export function loadAuditFrames(dir: string): AuditFrame[] {
  const meta = JSON.parse(fs.readFileSync(path.join(dir, "episode.json"), "utf-8"))
  const scenario = meta.scenario
  const clearance: number = scenario.sim.clearance
  const [sx, sy] = scenario.start
  const [gx, gy] = scenario.goal
  const frames: AuditFrame[] = []
  for (const file of fs.readdirSync(dir).sort()) {
    const match = file.match(/^frame_(\d+)\.json$/)
    if (!match) continue
    const record = JSON.parse(fs.readFileSync(path.join(dir, file), "utf-8"))
    const grid = readGrid(path.join(dir, `frame_${match[1]}_elevation.txt`))
    const filled = infill(grid.values, grid.n)
    const elevNorm = normalizeElevation(filled, clearance)
    const [x, y, yaw] = record.pose
    const dGoal = Math.hypot(gx - x, gy - y)
    const alphaGoal = dGoal > 1e-12 ? wrapAngle(Math.atan2(gy - y, gx - x) - yaw) : 0
    const toRobot = [x - sx, y - sy]
    const toGoal = [gx - sx, gy - sy]
    const nr = Math.hypot(toRobot[0], toRobot[1])
    const ng = Math.hypot(toGoal[0], toGoal[1])
    let alphaRel = 0
    if (nr > 1e-12 && ng > 1e-12) {
      const cross = toRobot[0] * toGoal[1] - toRobot[1] * toGoal[0]
      const dot = toRobot[0] * toGoal[0] + toRobot[1] * toGoal[1]
      alphaRel = Math.abs(Math.atan2(cross, dot))
    }
    const heading = headingGradient(filled, grid.n, grid.res)
    const obs = new Float64Array(grid.n * grid.n + 5 + grid.n / 2)
    obs.set(elevNorm, 0)
    obs[grid.n * grid.n + 0] = dGoal
    obs[grid.n * grid.n + 1] = alphaGoal
    obs[grid.n * grid.n + 2] = alphaRel
    obs[grid.n * grid.n + 3] = Math.abs(record.roll ?? 0)
    obs[grid.n * grid.n + 4] = Math.abs(record.pitch ?? 0)
    obs.set(heading, grid.n * grid.n + 5)
    frames.push({ index: Number(match[1]), obs, res: grid.res, n: grid.n })
  }
  return frames
}
