/**
 * Attention-mask extraction: unweighted channel sum of the refined feature
 * block, min-max normalized to [0, 1] on export (a constant raw mask maps
 * to all 0.5 so downstream products stay scale-stable).
 */

import { writeGrid } from "./gridio.js"
import { Tensor } from "./tensor.js"

/** Raw per-cell channel sum of refined features [C, n, n] -> length n*n. */
export function extractMaskRaw(refined: Tensor): Float64Array {
  const [c, h, w] = refined.shape
  const plane = h * w
  const raw = new Float64Array(plane)
  for (let i = 0; i < plane; i++) {
    let acc = 0
    for (let ci = 0; ci < c; ci++) acc += refined.data[ci * plane + i]
    if (!Number.isFinite(acc)) throw new Error("non-finite activation in refined features")
    raw[i] = acc
  }
  return raw
}

/** Min-max normalize into [0, 1]; constant input becomes all 0.5. */
export function normalizeMask(raw: Float64Array): Float64Array {
  let lo = Infinity
  let hi = -Infinity
  for (const v of raw) {
    if (v < lo) lo = v
    if (v > hi) hi = v
  }
  const out = new Float64Array(raw.length)
  if (hi <= lo) {
    out.fill(0.5)
    return out
  }
  for (let i = 0; i < raw.length; i++) out[i] = (raw[i] - lo) / (hi - lo)
  return out
}

export function exportMask(path: string, refined: Tensor, res: number): void {
  const n = refined.shape[1]
  writeGrid(path, normalizeMask(extractMaskRaw(refined)), n, res, "learned")
}
