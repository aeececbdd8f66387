/**
 * Minimal float64 reverse-mode autodiff over dense tensors.
 *
 * Tensors are unbatched (training loops iterate samples, accumulating
 * parameter gradients). Ops record a backward closure on a tape; calling
 * backward() on a scalar walks the tape in reverse. Float64 keeps central
 * finite-difference gradient checks meaningful to ~1e-10.
 */

export class Tensor {
  readonly shape: number[]
  readonly data: Float64Array
  grad: Float64Array | null = null
  /** parameters and intermediate nodes that require gradient flow */
  readonly requiresGrad: boolean
  backwardFn: (() => void) | null = null
  readonly parents: Tensor[]

  constructor(shape: number[], data: Float64Array, requiresGrad = false,
              parents: Tensor[] = []) {
    this.shape = shape
    this.data = data
    this.requiresGrad = requiresGrad
    this.parents = parents
  }

  get size(): number {
    return this.data.length
  }

  ensureGrad(): Float64Array {
    if (this.grad === null) this.grad = new Float64Array(this.size)
    return this.grad
  }

  zeroGrad(): void {
    if (this.grad) this.grad.fill(0)
  }

  item(): number {
    if (this.size !== 1) throw new Error(`item() on tensor of size ${this.size}`)
    return this.data[0]
  }
}

export function tensor(shape: number[], values?: ArrayLike<number>): Tensor {
  const size = shape.reduce((a, b) => a * b, 1)
  const data = new Float64Array(size)
  if (values !== undefined) {
    if (values.length !== size) throw new Error("values do not match shape")
    data.set(values as number[])
  }
  return new Tensor(shape, data)
}

export function param(shape: number[], init: () => number): Tensor {
  const size = shape.reduce((a, b) => a * b, 1)
  const data = new Float64Array(size)
  for (let i = 0; i < size; i++) data[i] = init()
  const t = new Tensor(shape, data, true)
  t.ensureGrad()
  return t
}

/** Graph tape: nodes in creation order for the current forward pass. */
let tape: Tensor[] = []
let taping = false

export function startTape(): void {
  tape = []
  taping = true
}

export function stopTape(): void {
  taping = false
  tape = []
}

function track(t: Tensor): Tensor {
  if (taping && t.requiresGrad) tape.push(t)
  return t
}

function out(shape: number[], parents: Tensor[]): Tensor {
  const needs = parents.some((p) => p.requiresGrad)
  const size = shape.reduce((a, b) => a * b, 1)
  return track(new Tensor(shape, new Float64Array(size), needs, parents))
}

/** Backpropagate from a scalar loss through the active tape. */
export function backward(loss: Tensor): void {
  if (loss.size !== 1) throw new Error("backward() needs a scalar")
  loss.ensureGrad()[0] = 1.0
  for (let i = tape.length - 1; i >= 0; i--) {
    const node = tape[i]
    if (node.backwardFn && node.grad) node.backwardFn()
  }
}

// ---------------------------------------------------------------------------
// elementwise

function unary(x: Tensor, f: (v: number) => number,
               df: (v: number, y: number) => number): Tensor {
  const y = out(x.shape, [x])
  for (let i = 0; i < x.size; i++) y.data[i] = f(x.data[i])
  if (y.requiresGrad) {
    y.backwardFn = () => {
      const gx = x.ensureGrad()
      const gy = y.grad!
      for (let i = 0; i < x.size; i++) gx[i] += gy[i] * df(x.data[i], y.data[i])
    }
  }
  return y
}

export const relu = (x: Tensor) => unary(x, (v) => (v > 0 ? v : 0), (v) => (v > 0 ? 1 : 0))
export const sigmoid = (x: Tensor) => unary(x, (v) => 1 / (1 + Math.exp(-v)), (_v, y) => y * (1 - y))
export const tanh = (x: Tensor) => unary(x, Math.tanh, (_v, y) => 1 - y * y)

export function add(a: Tensor, b: Tensor): Tensor {
  if (a.size !== b.size) throw new Error("add: size mismatch")
  const y = out(a.shape, [a, b])
  for (let i = 0; i < a.size; i++) y.data[i] = a.data[i] + b.data[i]
  if (y.requiresGrad) {
    y.backwardFn = () => {
      const gy = y.grad!
      if (a.requiresGrad) {
        const ga = a.ensureGrad()
        for (let i = 0; i < a.size; i++) ga[i] += gy[i]
      }
      if (b.requiresGrad) {
        const gb = b.ensureGrad()
        for (let i = 0; i < b.size; i++) gb[i] += gy[i]
      }
    }
  }
  return y
}

export function sub(a: Tensor, b: Tensor): Tensor {
  return add(a, scale(b, -1))
}

export function mul(a: Tensor, b: Tensor): Tensor {
  if (a.size !== b.size) throw new Error("mul: size mismatch")
  const y = out(a.shape, [a, b])
  for (let i = 0; i < a.size; i++) y.data[i] = a.data[i] * b.data[i]
  if (y.requiresGrad) {
    y.backwardFn = () => {
      const gy = y.grad!
      if (a.requiresGrad) {
        const ga = a.ensureGrad()
        for (let i = 0; i < a.size; i++) ga[i] += gy[i] * b.data[i]
      }
      if (b.requiresGrad) {
        const gb = b.ensureGrad()
        for (let i = 0; i < b.size; i++) gb[i] += gy[i] * a.data[i]
      }
    }
  }
  return y
}

export function scale(x: Tensor, s: number): Tensor {
  const y = out(x.shape, [x])
  for (let i = 0; i < x.size; i++) y.data[i] = x.data[i] * s
  if (y.requiresGrad) {
    y.backwardFn = () => {
      const gx = x.ensureGrad()
      const gy = y.grad!
      for (let i = 0; i < x.size; i++) gx[i] += gy[i] * s
    }
  }
  return y
}

// ---------------------------------------------------------------------------
// shape plumbing

export function reshape(x: Tensor, shape: number[]): Tensor {
  const size = shape.reduce((a, b) => a * b, 1)
  if (size !== x.size) throw new Error("reshape: size mismatch")
  const y = out(shape, [x])
  y.data.set(x.data)
  if (y.requiresGrad) {
    y.backwardFn = () => {
      const gx = x.ensureGrad()
      const gy = y.grad!
      for (let i = 0; i < x.size; i++) gx[i] += gy[i]
    }
  }
  return y
}

export function concat(parts: Tensor[]): Tensor {
  const size = parts.reduce((a, p) => a + p.size, 0)
  const y = out([size], parts)
  let off = 0
  for (const p of parts) {
    y.data.set(p.data, off)
    off += p.size
  }
  if (y.requiresGrad) {
    y.backwardFn = () => {
      const gy = y.grad!
      let o = 0
      for (const p of parts) {
        if (p.requiresGrad) {
          const gp = p.ensureGrad()
          for (let i = 0; i < p.size; i++) gp[i] += gy[o + i]
        }
        o += p.size
      }
    }
  }
  return y
}

// ---------------------------------------------------------------------------
// dense and conv

/** y = W x + b with W [out, in], x [in], b [out]. */
export function dense(w: Tensor, b: Tensor, x: Tensor): Tensor {
  const [outDim, inDim] = w.shape
  if (x.size !== inDim || b.size !== outDim) throw new Error("dense: shape mismatch")
  const y = out([outDim], [w, b, x])
  for (let o = 0; o < outDim; o++) {
    let acc = b.data[o]
    const row = o * inDim
    for (let i = 0; i < inDim; i++) acc += w.data[row + i] * x.data[i]
    y.data[o] = acc
  }
  if (y.requiresGrad) {
    y.backwardFn = () => {
      const gy = y.grad!
      if (w.requiresGrad) {
        const gw = w.ensureGrad()
        for (let o = 0; o < outDim; o++) {
          const row = o * inDim
          const g = gy[o]
          for (let i = 0; i < inDim; i++) gw[row + i] += g * x.data[i]
        }
      }
      if (b.requiresGrad) {
        const gb = b.ensureGrad()
        for (let o = 0; o < outDim; o++) gb[o] += gy[o]
      }
      if (x.requiresGrad) {
        const gx = x.ensureGrad()
        for (let o = 0; o < outDim; o++) {
          const row = o * inDim
          const g = gy[o]
          for (let i = 0; i < inDim; i++) gx[i] += g * w.data[row + i]
        }
      }
    }
  }
  return y
}

/**
 * Same-padded stride-1 2D convolution: x [Cin, H, W], k [Cout, Cin, kh, kw]
 * (odd kernel), b [Cout] -> [Cout, H, W].
 */
export function conv2d(k: Tensor, b: Tensor, x: Tensor): Tensor {
  const [cin, h, w] = x.shape
  const [cout, cink, kh, kw] = k.shape
  if (cink !== cin) throw new Error("conv2d: channel mismatch")
  const ph = (kh - 1) / 2
  const pw = (kw - 1) / 2
  const y = out([cout, h, w], [k, b, x])
  const plane = h * w
  for (let co = 0; co < cout; co++) {
    const kBase = co * cin * kh * kw
    for (let r = 0; r < h; r++) {
      for (let c = 0; c < w; c++) {
        let acc = b.data[co]
        for (let ci = 0; ci < cin; ci++) {
          const xBase = ci * plane
          const kcBase = kBase + ci * kh * kw
          for (let u = 0; u < kh; u++) {
            const rr = r + u - ph
            if (rr < 0 || rr >= h) continue
            for (let v = 0; v < kw; v++) {
              const cc = c + v - pw
              if (cc < 0 || cc >= w) continue
              acc += k.data[kcBase + u * kw + v] * x.data[xBase + rr * w + cc]
            }
          }
        }
        y.data[co * plane + r * w + c] = acc
      }
    }
  }
  if (y.requiresGrad) {
    y.backwardFn = () => {
      const gy = y.grad!
      const gk = k.requiresGrad ? k.ensureGrad() : null
      const gb = b.requiresGrad ? b.ensureGrad() : null
      const gx = x.requiresGrad ? x.ensureGrad() : null
      for (let co = 0; co < cout; co++) {
        const kBase = co * cin * kh * kw
        for (let r = 0; r < h; r++) {
          for (let c = 0; c < w; c++) {
            const g = gy[co * plane + r * w + c]
            if (g === 0) continue
            if (gb) gb[co] += g
            for (let ci = 0; ci < cin; ci++) {
              const xBase = ci * plane
              const kcBase = kBase + ci * kh * kw
              for (let u = 0; u < kh; u++) {
                const rr = r + u - ph
                if (rr < 0 || rr >= h) continue
                for (let v = 0; v < kw; v++) {
                  const cc = c + v - pw
                  if (cc < 0 || cc >= w) continue
                  if (gk) gk[kcBase + u * kw + v] += g * x.data[xBase + rr * w + cc]
                  if (gx) gx[xBase + rr * w + cc] += g * k.data[kcBase + u * kw + v]
                }
              }
            }
          }
        }
      }
    }
  }
  return y
}

// ---------------------------------------------------------------------------
// reductions used by the attention blocks

/** [C, H, W] -> [C] spatial mean per channel. */
export function spatialMean(x: Tensor): Tensor {
  const [c, h, w] = x.shape
  const plane = h * w
  const y = out([c], [x])
  for (let ci = 0; ci < c; ci++) {
    let acc = 0
    for (let i = 0; i < plane; i++) acc += x.data[ci * plane + i]
    y.data[ci] = acc / plane
  }
  if (y.requiresGrad) {
    y.backwardFn = () => {
      const gx = x.ensureGrad()
      const gy = y.grad!
      for (let ci = 0; ci < c; ci++) {
        const g = gy[ci] / plane
        for (let i = 0; i < plane; i++) gx[ci * plane + i] += g
      }
    }
  }
  return y
}

/** [C, H, W] -> [C] spatial max per channel. */
export function spatialMax(x: Tensor): Tensor {
  const [c, h, w] = x.shape
  const plane = h * w
  const y = out([c], [x])
  const arg = new Int32Array(c)
  for (let ci = 0; ci < c; ci++) {
    let best = -Infinity
    let bi = 0
    for (let i = 0; i < plane; i++) {
      const v = x.data[ci * plane + i]
      if (v > best) {
        best = v
        bi = i
      }
    }
    y.data[ci] = best
    arg[ci] = bi
  }
  if (y.requiresGrad) {
    y.backwardFn = () => {
      const gx = x.ensureGrad()
      const gy = y.grad!
      for (let ci = 0; ci < c; ci++) gx[ci * plane + arg[ci]] += gy[ci]
    }
  }
  return y
}

/** [C, H, W] -> [2, H, W]: per-pixel channel mean and channel max. */
export function channelPool(x: Tensor): Tensor {
  const [c, h, w] = x.shape
  const plane = h * w
  const y = out([2, h, w], [x])
  const arg = new Int32Array(plane)
  for (let i = 0; i < plane; i++) {
    let acc = 0
    let best = -Infinity
    let bc = 0
    for (let ci = 0; ci < c; ci++) {
      const v = x.data[ci * plane + i]
      acc += v
      if (v > best) {
        best = v
        bc = ci
      }
    }
    y.data[i] = acc / c
    y.data[plane + i] = best
    arg[i] = bc
  }
  if (y.requiresGrad) {
    y.backwardFn = () => {
      const gx = x.ensureGrad()
      const gy = y.grad!
      for (let i = 0; i < plane; i++) {
        const gMean = gy[i] / c
        for (let ci = 0; ci < c; ci++) gx[ci * plane + i] += gMean
        gx[arg[i] * plane + i] += gy[plane + i]
      }
    }
  }
  return y
}

/** x [C, H, W] scaled per channel by s [C]. */
export function scaleChannels(x: Tensor, s: Tensor): Tensor {
  const [c, h, w] = x.shape
  if (s.size !== c) throw new Error("scaleChannels: gate size mismatch")
  const plane = h * w
  const y = out(x.shape, [x, s])
  for (let ci = 0; ci < c; ci++) {
    const g = s.data[ci]
    for (let i = 0; i < plane; i++) y.data[ci * plane + i] = x.data[ci * plane + i] * g
  }
  if (y.requiresGrad) {
    y.backwardFn = () => {
      const gy = y.grad!
      if (x.requiresGrad) {
        const gx = x.ensureGrad()
        for (let ci = 0; ci < c; ci++) {
          const g = s.data[ci]
          for (let i = 0; i < plane; i++) gx[ci * plane + i] += gy[ci * plane + i] * g
        }
      }
      if (s.requiresGrad) {
        const gs = s.ensureGrad()
        for (let ci = 0; ci < c; ci++) {
          let acc = 0
          for (let i = 0; i < plane; i++) acc += gy[ci * plane + i] * x.data[ci * plane + i]
          gs[ci] += acc
        }
      }
    }
  }
  return y
}

/** x [C, H, W] scaled per pixel by m [1, H, W]. */
export function scaleSpatial(x: Tensor, m: Tensor): Tensor {
  const [c, h, w] = x.shape
  const plane = h * w
  if (m.size !== plane) throw new Error("scaleSpatial: map size mismatch")
  const y = out(x.shape, [x, m])
  for (let ci = 0; ci < c; ci++) {
    for (let i = 0; i < plane; i++) y.data[ci * plane + i] = x.data[ci * plane + i] * m.data[i]
  }
  if (y.requiresGrad) {
    y.backwardFn = () => {
      const gy = y.grad!
      if (x.requiresGrad) {
        const gx = x.ensureGrad()
        for (let ci = 0; ci < c; ci++) {
          for (let i = 0; i < plane; i++) gx[ci * plane + i] += gy[ci * plane + i] * m.data[i]
        }
      }
      if (m.requiresGrad) {
        const gm = m.ensureGrad()
        for (let i = 0; i < plane; i++) {
          let acc = 0
          for (let ci = 0; ci < c; ci++) acc += gy[ci * plane + i] * x.data[ci * plane + i]
          gm[i] += acc
        }
      }
    }
  }
  return y
}

// ---------------------------------------------------------------------------
// scalar losses

export function meanAll(x: Tensor): Tensor {
  const y = out([1], [x])
  let acc = 0
  for (let i = 0; i < x.size; i++) acc += x.data[i]
  y.data[0] = acc / x.size
  if (y.requiresGrad) {
    y.backwardFn = () => {
      const gx = x.ensureGrad()
      const g = y.grad![0] / x.size
      for (let i = 0; i < x.size; i++) gx[i] += g
    }
  }
  return y
}

export function square(x: Tensor): Tensor {
  return unary(x, (v) => v * v, (v) => 2 * v)
}
