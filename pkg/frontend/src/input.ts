// Operator input: keyboard, gamepad, or the on-screen virtual joystick,
// mapped onto the configured action bounds. The mapping itself is pure so
// it can be tested without a browser.

import { GridSpec } from "./protocol";

export interface Axes {
  forward: number;   // [-1, 1], stick forward positive
  vertical: number;  // [-1, 1], up positive
  turn: number;      // [-1, 1], left (ccw) positive
  rot: number;       // [-1, 1], library rotation offset
}

export interface ActionValues {
  vx: number;
  vz: number;
  omega: number;
  rot: number;
}

export const ZERO_AXES: Axes = { forward: 0, vertical: 0, turn: 0, rot: 0 };

function mapAxis(stick: number, lo: number, hi: number): number {
  const s = Math.max(-1, Math.min(1, stick));
  // per-side linear map so a centered stick is always the zero action
  return s >= 0 ? s * Math.max(hi, 0) : -s * Math.min(lo, 0);
}

/** Map normalized stick axes onto the action grid bounds. */
export function axesToAction(axes: Axes, grid: GridSpec): ActionValues {
  return {
    vx: mapAxis(axes.forward, grid.vx[0], grid.vx[1]),
    vz: mapAxis(axes.vertical, grid.vz[0], grid.vz[1]),
    omega: mapAxis(axes.turn, grid.omega[0], grid.omega[1]),
    rot: axes.rot * Math.PI,
  };
}

const KEY_AXES: Record<string, Partial<Axes>> = {
  KeyW: { forward: 1 },
  KeyS: { forward: -1 },
  KeyA: { turn: 1 },
  KeyD: { turn: -1 },
  KeyR: { vertical: 1 },
  KeyF: { vertical: -1 },
  KeyQ: { rot: 0.5 },
  KeyE: { rot: -0.5 },
};

/** Combine currently held keys into stick axes. */
export function keysToAxes(held: Iterable<string>): Axes {
  const out: Axes = { ...ZERO_AXES };
  for (const code of held) {
    const contrib = KEY_AXES[code];
    if (!contrib) continue;
    for (const [k, v] of Object.entries(contrib)) {
      out[k as keyof Axes] += v as number;
    }
  }
  out.forward = Math.max(-1, Math.min(1, out.forward));
  out.vertical = Math.max(-1, Math.min(1, out.vertical));
  out.turn = Math.max(-1, Math.min(1, out.turn));
  out.rot = Math.max(-1, Math.min(1, out.rot));
  return out;
}

/** Standard-mapping gamepad: left stick drive, right stick X turn. */
export function gamepadToAxes(axes: readonly number[]): Axes {
  const dead = (v: number) => (Math.abs(v) < 0.08 ? 0 : v);
  const flip = (v: number) => (v === 0 ? 0 : -v); // avoid -0 artifacts
  return {
    forward: flip(dead(axes[1] ?? 0)),
    turn: flip(dead(axes[2] ?? 0)),
    vertical: flip(dead(axes[3] ?? 0)),
    rot: dead(axes[0] ?? 0),
  };
}

export function axesActive(a: Axes): boolean {
  return a.forward !== 0 || a.vertical !== 0 || a.turn !== 0 || a.rot !== 0;
}

/** Tracks keyboard/virtual-joystick state in the browser. */
export class InputTracker {
  private held = new Set<string>();
  virtual: Axes = { ...ZERO_AXES };
  gamepadIndex: number | null = null;

  keyDown(code: string): void {
    this.held.add(code);
  }

  keyUp(code: string): void {
    this.held.delete(code);
  }

  releaseAll(): void {
    this.held.clear();
    this.virtual = { ...ZERO_AXES };
  }

  /** Gamepad wins when active, then keyboard, then the virtual joystick. */
  sample(gamepadAxes: readonly number[] | null): Axes {
    if (gamepadAxes) {
      const pad = gamepadToAxes(gamepadAxes);
      if (axesActive(pad)) return pad;
    }
    const keys = keysToAxes(this.held);
    if (axesActive(keys)) return keys;
    return this.virtual;
  }
}
