// Scripted-socket cockpit check: connects to a live session, streams a
// full-forward action like the UI would, routes every server message
// through the real CockpitState, and fails if any map checksum mismatches
// or the telemetry goes silent.
//
//   node dist/scripted-check.mjs --url ws://127.0.0.1:8765 --duration 60

import { randomBytes } from "node:crypto";
import { Socket, createConnection } from "node:net";

import { axesToAction, ZERO_AXES } from "../src/input";
import { actionMessage, parseMessage } from "../src/protocol";
import { CockpitState } from "../src/state";

function parseArgs(): { host: string; port: number; duration: number } {
  const args = process.argv.slice(2);
  let url = "ws://127.0.0.1:8765";
  let duration = 60;
  for (let i = 0; i < args.length; i++) {
    if (args[i] === "--url") url = args[++i];
    if (args[i] === "--duration") duration = Number(args[++i]);
  }
  const m = /^ws:\/\/([^:/]+):(\d+)/.exec(url);
  if (!m) throw new Error(`bad ws url: ${url}`);
  return { host: m[1], port: Number(m[2]), duration };
}

class MiniWS {
  private buf = Buffer.alloc(0);
  private handshaken = false;
  onmessage: (text: string) => void = () => {};
  onopen: () => void = () => {};
  onclose: () => void = () => {};

  constructor(private sock: Socket) {
    sock.on("data", (d) => this.feed(d));
    sock.on("close", () => this.onclose());
    sock.on("error", () => this.onclose());
  }

  static connect(host: string, port: number): MiniWS {
    const sock = createConnection({ host, port });
    const ws = new MiniWS(sock);
    sock.on("connect", () => {
      const key = randomBytes(16).toString("base64");
      sock.write(
        `GET / HTTP/1.1\r\nHost: ${host}:${port}\r\n` +
        "Upgrade: websocket\r\nConnection: Upgrade\r\n" +
        `Sec-WebSocket-Key: ${key}\r\nSec-WebSocket-Version: 13\r\n\r\n`);
    });
    return ws;
  }

  sendText(text: string): void {
    const payload = Buffer.from(text, "utf-8");
    const mask = randomBytes(4);
    const masked = Buffer.from(payload.map((b, i) => b ^ mask[i % 4]));
    let header: Buffer;
    if (payload.length < 126) {
      header = Buffer.from([0x81, 0x80 | payload.length]);
    } else {
      header = Buffer.alloc(4);
      header[0] = 0x81;
      header[1] = 0x80 | 126;
      header.writeUInt16BE(payload.length, 2);
    }
    this.sock.write(Buffer.concat([header, mask, masked]));
  }

  close(): void {
    this.sock.destroy();
  }

  private feed(data: Buffer): void {
    this.buf = Buffer.concat([this.buf, data]);
    if (!this.handshaken) {
      const end = this.buf.indexOf("\r\n\r\n");
      if (end < 0) return;
      const head = this.buf.subarray(0, end).toString();
      if (!head.includes("101") || !/Sec-WebSocket-Accept:/i.test(head)) {
        throw new Error(`handshake failed: ${head.split("\r\n")[0]}`);
      }
      this.buf = this.buf.subarray(end + 4);
      this.handshaken = true;
      this.onopen();
    }
    for (;;) {
      if (this.buf.length < 2) return;
      const opcode = this.buf[0] & 0x0f;
      let len = this.buf[1] & 0x7f;
      let off = 2;
      if (len === 126) {
        if (this.buf.length < 4) return;
        len = this.buf.readUInt16BE(2);
        off = 4;
      } else if (len === 127) {
        if (this.buf.length < 10) return;
        len = Number(this.buf.readBigUInt64BE(2));
        off = 10;
      }
      if (this.buf.length < off + len) return;
      const payload = this.buf.subarray(off, off + len);
      this.buf = this.buf.subarray(off + len);
      if (opcode === 0x1) this.onmessage(payload.toString("utf-8"));
      if (opcode === 0x8) {
        this.onclose();
        return;
      }
    }
  }
}

function main(): void {
  const { host, port, duration } = parseArgs();
  const state = new CockpitState();
  const ws = MiniWS.connect(host, port);
  let closed = false;
  const counts: Record<string, number> = {};

  ws.onmessage = (text) => {
    const msg = parseMessage(text);
    if (!msg) return;
    counts[msg.type] = (counts[msg.type] ?? 0) + 1;
    state.apply(msg);
    if (msg.type === "map_sum" && state.checksum.lastOk === false) {
      console.error(`CHECKSUM MISMATCH after ${state.checksum.checked} checks`);
      finish(1);
    }
  };
  ws.onclose = () => {
    if (!closed) finish(state.checksum.mismatches === 0 ? 0 : 1);
  };

  const pump = setInterval(() => {
    const grid = state.config?.grid;
    if (!grid) return;
    const a = axesToAction({ ...ZERO_AXES, forward: 1 }, grid);
    ws.sendText(actionMessage(a.vx, a.vz, a.omega, a.rot));
  }, 40);

  const timer = setTimeout(() => finish(evaluate()), duration * 1000);

  function evaluate(): number {
    const ok = state.checksum.checked > 0
      && state.checksum.mismatches === 0
      && (counts["state"] ?? 0) > 0
      && (counts["chosen"] ?? 0) > 0
      && (counts["map_diff"] ?? 0) > 0;
    console.log(JSON.stringify({
      ok,
      duration,
      messages: counts,
      voxels: state.voxels.size,
      checksums: state.checksum,
      maxSpeed: Math.max(0, ...state.speed.values),
      prunedIntervals: state.prunedIntervals.length,
    }, null, 1));
    return ok ? 0 : 1;
  }

  function finish(code: number): void {
    if (closed) return;
    closed = true;
    clearInterval(pump);
    clearTimeout(timer);
    ws.close();
    process.exit(code);
  }
}

main();
