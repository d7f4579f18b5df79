// Canvas renderer: top-down map + library fan on the left, altitude
// profile and speed/|accel|/clearance strip charts on the right, with
// pruned intervals shaded. One full-window canvas, panels laid out here.

import { CockpitState, RingBuffer } from "./state";

export interface Hud {
  frameMs: number;
  connected: boolean;
  wsUrl: string;
}

const COLORS = {
  bg: "#10141a",
  panel: "#161b23",
  gridline: "#232b36",
  worldOutline: "#3d4756",
  voxel: "#7fd4ff",
  library: "rgba(120, 130, 145, 0.35)",
  op: "#ffd24d",
  chosen: "#5dff8f",
  emergency: "#ff5d5d",
  vehicle: "#ffffff",
  trail: "rgba(255,255,255,0.35)",
  text: "#c7d0dc",
  shade: "rgba(255, 160, 60, 0.18)",
  line: "#8ab4ff",
};

interface Rect { x: number; y: number; w: number; h: number }

export class Renderer {
  private ctx: CanvasRenderingContext2D;

  constructor(private canvas: HTMLCanvasElement) {
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("2d canvas unavailable");
    this.ctx = ctx;
  }

  draw(state: CockpitState, hud: Hud): void {
    const { canvas, ctx } = this;
    const w = canvas.width = canvas.clientWidth * devicePixelRatio;
    const h = canvas.height = canvas.clientHeight * devicePixelRatio;
    ctx.save();
    ctx.scale(devicePixelRatio, devicePixelRatio);
    const cw = w / devicePixelRatio;
    const ch = h / devicePixelRatio;
    ctx.fillStyle = COLORS.bg;
    ctx.fillRect(0, 0, cw, ch);

    const header = 26;
    const rightW = Math.min(340, cw * 0.34);
    const main: Rect = { x: 8, y: header, w: cw - rightW - 24, h: ch - header - 8 };
    const charts = ["altitude", "speed", "accel", "clearance"] as const;
    const chH = (ch - header - 8 * (charts.length + 1)) / charts.length;

    this.drawHeader(state, hud, cw);
    this.drawTopDown(state, main);
    charts.forEach((name, i) => {
      const rect: Rect = {
        x: cw - rightW - 8, y: header + i * (chH + 8), w: rightW, h: chH,
      };
      this.drawChart(state, name, rect);
    });
    ctx.restore();
  }

  private drawHeader(state: CockpitState, hud: Hud, cw: number): void {
    const { ctx } = this;
    ctx.font = "12px system-ui, sans-serif";
    ctx.fillStyle = COLORS.text;
    const sum = state.checksum;
    const sumText = sum.lastOk === null ? "map n/a"
      : sum.lastOk ? `map ok (${sum.checked} checks)`
        : `MAP MISMATCH (${sum.mismatches}/${sum.checked})`;
    const parts = [
      hud.connected ? `connected ${hud.wsUrl}` : `DISCONNECTED ${hud.wsUrl}`,
      state.config ? `scenario ${state.config.scenario}` : "no config",
      `${state.voxels.size} voxels`,
      sumText,
      `${hud.frameMs.toFixed(1)} ms/frame`,
    ];
    ctx.fillStyle = hud.connected ? COLORS.text : COLORS.emergency;
    ctx.fillText(parts.join("   |   "), 10, 17);
    if (state.chosen?.emergency) {
      ctx.fillStyle = COLORS.emergency;
      ctx.fillText("EMERGENCY STOP", cw - 130, 17);
    } else if (state.chosen?.pruned) {
      ctx.fillStyle = COLORS.op;
      ctx.fillText("PRUNED", cw - 70, 17);
    }
  }

  private worldTransform(state: CockpitState, r: Rect) {
    const b = state.config?.bounds ?? [[-10, -10, 0], [10, 10, 5]];
    const wx = b[1][0] - b[0][0];
    const wy = b[1][1] - b[0][1];
    const scale = Math.min(r.w / wx, r.h / wy);
    const ox = r.x + (r.w - wx * scale) / 2 - b[0][0] * scale;
    const oy = r.y + (r.h + wy * scale) / 2 + b[0][1] * scale;
    return (x: number, y: number): [number, number] =>
      [ox + x * scale, oy - y * scale];
  }

  private drawTopDown(state: CockpitState, r: Rect): void {
    const { ctx } = this;
    ctx.fillStyle = COLORS.panel;
    ctx.fillRect(r.x, r.y, r.w, r.h);
    ctx.save();
    ctx.beginPath();
    ctx.rect(r.x, r.y, r.w, r.h);
    ctx.clip();
    const tf = this.worldTransform(state, r);

    // ground-truth outlines (faint; the map voxels are the live data)
    ctx.strokeStyle = COLORS.worldOutline;
    ctx.lineWidth = 1;
    for (const ob of state.config?.world ?? []) {
      ctx.beginPath();
      if (ob.type === "cylinder" && ob.center && ob.radius) {
        const [cx, cy] = tf(ob.center[0], ob.center[1]);
        const [ex] = tf(ob.center[0] + ob.radius, ob.center[1]);
        ctx.arc(cx, cy, ex - cx, 0, Math.PI * 2);
      } else if (ob.type === "box" && ob.min && ob.max) {
        const [x0, y0] = tf(ob.min[0], ob.min[1]);
        const [x1, y1] = tf(ob.max[0], ob.max[1]);
        ctx.rect(x0, Math.min(y0, y1), x1 - x0, Math.abs(y1 - y0));
      } else if (ob.type === "wall" && ob.p1 && ob.p2) {
        ctx.moveTo(...tf(ob.p1[0], ob.p1[1]));
        ctx.lineTo(...tf(ob.p2[0], ob.p2[1]));
      }
      ctx.stroke();
    }

    // voxels
    ctx.fillStyle = COLORS.voxel;
    const vs = state.voxelSize;
    const [sx0] = tf(0, 0);
    const [sx1] = tf(vs, 0);
    const px = Math.max(1.5, sx1 - sx0);
    for (const c of state.voxels.values()) {
      const [x, y] = tf(c[0], c[1]);
      ctx.fillRect(x - px / 2, y - px / 2, px, px);
    }

    // library fan
    const lib = state.library;
    if (lib) {
      ctx.lineWidth = 1;
      lib.trajs.forEach((traj, i) => {
        if (i === lib.chosen) return;
        ctx.strokeStyle = i === lib.op && lib.pruned ? COLORS.op : COLORS.library;
        ctx.lineWidth = i === lib.op && lib.pruned ? 2 : 1;
        this.polyline(traj, tf);
      });
    }

    // chosen trajectory
    if (state.chosen) {
      ctx.strokeStyle = state.chosen.emergency ? COLORS.emergency : COLORS.chosen;
      ctx.lineWidth = 2.5;
      this.polyline(state.chosen.points, tf);
    }

    // trail and vehicle
    if (state.trail.length > 1) {
      ctx.strokeStyle = COLORS.trail;
      ctx.lineWidth = 1;
      ctx.beginPath();
      state.trail.forEach(([x, y], i) => {
        const p = tf(x, y);
        i === 0 ? ctx.moveTo(...p) : ctx.lineTo(...p);
      });
      ctx.stroke();
    }
    const st = state.latest;
    if (st) {
      const [x, y] = tf(st.pos[0], st.pos[1]);
      ctx.fillStyle = COLORS.vehicle;
      ctx.save();
      ctx.translate(x, y);
      ctx.rotate(-st.yaw);
      ctx.beginPath();
      ctx.moveTo(8, 0);
      ctx.lineTo(-5, 4.5);
      ctx.lineTo(-5, -4.5);
      ctx.closePath();
      ctx.fill();
      ctx.restore();
    }
    ctx.restore();
  }

  private polyline(points: number[][], tf: (x: number, y: number) => [number, number]): void {
    if (points.length < 2) return;
    const { ctx } = this;
    ctx.beginPath();
    points.forEach((p, i) => {
      const q = tf(p[0], p[1]);
      i === 0 ? ctx.moveTo(...q) : ctx.lineTo(...q);
    });
    ctx.stroke();
  }

  private drawChart(state: CockpitState,
                    name: "altitude" | "speed" | "accel" | "clearance",
                    r: Rect): void {
    const { ctx } = this;
    const buf: RingBuffer = state[name];
    ctx.fillStyle = COLORS.panel;
    ctx.fillRect(r.x, r.y, r.w, r.h);
    ctx.fillStyle = COLORS.text;
    ctx.font = "11px system-ui, sans-serif";
    const label = { altitude: "altitude z (m)", speed: "speed (m/s)",
                    accel: "|accel| (m/s²)", clearance: "map clearance (m)" }[name];
    const last = buf.length ? buf.values[buf.length - 1] : null;
    ctx.fillText(`${label}${last !== null ? `  ${last.toFixed(2)}` : ""}`,
                 r.x + 6, r.y + 13);
    if (buf.length < 2) return;

    const t0 = buf.times[0];
    const t1 = buf.times[buf.length - 1];
    const span = Math.max(t1 - t0, 1e-6);
    let vmax = Math.max(...buf.values, 1e-6);
    let vmin = Math.min(...buf.values, 0);
    if (name === "clearance") vmax = Math.min(vmax, 10);
    const pad = 16;
    const tx = (t: number) => r.x + 4 + (t - t0) / span * (r.w - 8);
    const ty = (v: number) =>
      r.y + r.h - 4 - (Math.min(v, vmax) - vmin) / (vmax - vmin || 1) * (r.h - pad - 8);

    // pruned intervals shading (speed/accel panels mirror the paper-style plots)
    if (name === "speed" || name === "accel") {
      ctx.fillStyle = COLORS.shade;
      for (const iv of state.prunedIntervals) {
        if (iv.end < t0 || iv.start > t1) continue;
        const a = tx(Math.max(iv.start, t0));
        const b = tx(Math.min(iv.end, t1));
        ctx.fillRect(a, r.y + pad, Math.max(b - a, 1.5), r.h - pad - 4);
      }
    }

    ctx.strokeStyle = COLORS.gridline;
    ctx.strokeRect(r.x, r.y, r.w, r.h);
    ctx.strokeStyle = COLORS.line;
    ctx.lineWidth = 1.4;
    ctx.beginPath();
    for (let i = 0; i < buf.length; i++) {
      const x = tx(buf.times[i]);
      const y = ty(buf.values[i]);
      i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y);
    }
    ctx.stroke();
  }
}
