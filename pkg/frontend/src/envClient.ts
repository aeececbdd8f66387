/**
 * Line-delimited JSON client for the terpnav environment server (TCP).
 *
 * One in-flight request at a time, matching the server's strictly serial
 * sessions.
 */

import * as net from "node:net"

export interface StepReply {
  obs: number[]
  reward: number
  components: { dist: number; head: number; stable: number; grad: number }
  done: boolean
  info: Record<string, unknown>
}

export interface ResetReply {
  obs: number[]
  info: Record<string, unknown>
}

export class EnvClient {
  private socket: net.Socket | null = null
  private buffer = ""
  private pending: Array<(line: string) => void> = []

  async connect(host: string, port: number, timeoutMs = 10_000): Promise<void> {
    await new Promise<void>((resolve, reject) => {
      const socket = net.createConnection({ host, port })
      const timer = setTimeout(() => {
        socket.destroy()
        reject(new Error(`connect timeout to ${host}:${port}`))
      }, timeoutMs)
      socket.once("connect", () => {
        clearTimeout(timer)
        this.socket = socket
        resolve()
      })
      socket.once("error", (err) => {
        clearTimeout(timer)
        reject(err)
      })
      socket.on("data", (chunk) => this.onData(chunk.toString("utf-8")))
    })
  }

  private onData(text: string): void {
    this.buffer += text
    let idx
    while ((idx = this.buffer.indexOf("\n")) >= 0) {
      const line = this.buffer.slice(0, idx)
      this.buffer = this.buffer.slice(idx + 1)
      const waiter = this.pending.shift()
      if (waiter) waiter(line)
    }
  }

  private request(message: object): Promise<any> {
    const socket = this.socket
    if (!socket) throw new Error("not connected")
    return new Promise((resolve, reject) => {
      this.pending.push((line) => {
        try {
          const reply = JSON.parse(line)
          if (reply.error) reject(new Error(`env error: ${reply.error}`))
          else resolve(reply)
        } catch (err) {
          reject(err)
        }
      })
      socket.write(JSON.stringify(message) + "\n")
    })
  }

  reset(): Promise<ResetReply> {
    return this.request({ cmd: "reset" })
  }

  step(action: [number, number]): Promise<StepReply> {
    return this.request({ cmd: "step", action })
  }

  async close(): Promise<void> {
    if (!this.socket) return
    try {
      await this.request({ cmd: "close" })
    } finally {
      this.socket.end()
      this.socket.destroy()
      this.socket = null
    }
  }
}
