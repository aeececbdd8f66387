/**
 * Grid exchange files (shared with the planner): header "n res", optional
 * '#' comment lines (masks carry "# provider: ..."), then n rows of n
 * decimal values. nan marks missing cells.
 */

import * as fs from "node:fs"

export interface GridFile {
  n: number
  res: number
  provider: string | null
  values: Float64Array // row-major n*n
}

function formatValue(v: number): string {
  if (Number.isNaN(v)) return "nan"
  if (!Number.isFinite(v)) return v > 0 ? "inf" : "-inf"
  return String(v)
}

export function writeGrid(path: string, values: ArrayLike<number>, n: number,
                          res: number, provider?: string): void {
  if (values.length !== n * n) throw new Error("grid values do not match n")
  const lines = [`${n} ${res}`]
  if (provider) lines.push(`# provider: ${provider}`)
  for (let r = 0; r < n; r++) {
    const row: string[] = []
    for (let c = 0; c < n; c++) row.push(formatValue(values[r * n + c] as number))
    lines.push(row.join(" "))
  }
  fs.writeFileSync(path, lines.join("\n") + "\n", "utf-8")
}

function parseValue(token: string): number {
  if (token === "nan") return NaN
  if (token === "inf") return Infinity
  if (token === "-inf") return -Infinity
  const v = Number(token)
  if (Number.isNaN(v)) throw new Error(`bad grid value ${token}`)
  return v
}

export function readGrid(path: string): GridFile {
  const lines = fs.readFileSync(path, "utf-8").split("\n")
  const header = lines[0].trim().split(/\s+/)
  if (header.length !== 2) throw new Error(`${path}: bad header`)
  const n = Number(header[0])
  const res = Number(header[1])
  if (!Number.isInteger(n) || n <= 0 || !(res > 0)) {
    throw new Error(`${path}: bad header values`)
  }
  let provider: string | null = null
  const values = new Float64Array(n * n)
  let row = 0
  for (const raw of lines.slice(1)) {
    const line = raw.trim()
    if (!line) continue
    if (line.startsWith("#")) {
      const body = line.replace(/^#+\s*/, "")
      if (body.startsWith("provider:")) provider = body.slice(9).trim()
      continue
    }
    const tokens = line.split(/\s+/)
    if (tokens.length !== n) throw new Error(`${path}: expected ${n} values per row`)
    if (row >= n) throw new Error(`${path}: too many rows`)
    for (let c = 0; c < n; c++) values[row * n + c] = parseValue(tokens[c])
    row += 1
  }
  if (row !== n) throw new Error(`${path}: expected ${n} rows, got ${row}`)
  return { n, res, provider, values }
}
