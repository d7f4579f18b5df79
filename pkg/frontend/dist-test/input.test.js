// test/input.test.ts
import assert from "node:assert/strict";
import { test } from "node:test";

// src/input.ts
var ZERO_AXES = { forward: 0, vertical: 0, turn: 0, rot: 0 };
function mapAxis(stick, lo, hi) {
  const s = Math.max(-1, Math.min(1, stick));
  return s >= 0 ? s * Math.max(hi, 0) : -s * Math.min(lo, 0);
}
function axesToAction(axes, grid) {
  return {
    vx: mapAxis(axes.forward, grid.vx[0], grid.vx[1]),
    vz: mapAxis(axes.vertical, grid.vz[0], grid.vz[1]),
    omega: mapAxis(axes.turn, grid.omega[0], grid.omega[1]),
    rot: axes.rot * Math.PI
  };
}
var KEY_AXES = {
  KeyW: { forward: 1 },
  KeyS: { forward: -1 },
  KeyA: { turn: 1 },
  KeyD: { turn: -1 },
  KeyR: { vertical: 1 },
  KeyF: { vertical: -1 },
  KeyQ: { rot: 0.5 },
  KeyE: { rot: -0.5 }
};
function keysToAxes(held) {
  const out = { ...ZERO_AXES };
  for (const code of held) {
    const contrib = KEY_AXES[code];
    if (!contrib) continue;
    for (const [k, v] of Object.entries(contrib)) {
      out[k] += v;
    }
  }
  out.forward = Math.max(-1, Math.min(1, out.forward));
  out.vertical = Math.max(-1, Math.min(1, out.vertical));
  out.turn = Math.max(-1, Math.min(1, out.turn));
  out.rot = Math.max(-1, Math.min(1, out.rot));
  return out;
}
function gamepadToAxes(axes) {
  const dead = (v) => Math.abs(v) < 0.08 ? 0 : v;
  const flip = (v) => v === 0 ? 0 : -v;
  return {
    forward: flip(dead(axes[1] ?? 0)),
    turn: flip(dead(axes[2] ?? 0)),
    vertical: flip(dead(axes[3] ?? 0)),
    rot: dead(axes[0] ?? 0)
  };
}
function axesActive(a) {
  return a.forward !== 0 || a.vertical !== 0 || a.turn !== 0 || a.rot !== 0;
}
var InputTracker = class {
  constructor() {
    this.held = /* @__PURE__ */ new Set();
    this.virtual = { ...ZERO_AXES };
    this.gamepadIndex = null;
  }
  keyDown(code) {
    this.held.add(code);
  }
  keyUp(code) {
    this.held.delete(code);
  }
  releaseAll() {
    this.held.clear();
    this.virtual = { ...ZERO_AXES };
  }
  /** Gamepad wins when active, then keyboard, then the virtual joystick. */
  sample(gamepadAxes) {
    if (gamepadAxes) {
      const pad = gamepadToAxes(gamepadAxes);
      if (axesActive(pad)) return pad;
    }
    const keys = keysToAxes(this.held);
    if (axesActive(keys)) return keys;
    return this.virtual;
  }
};

// test/input.test.ts
var GRID = { vx: [0, 10, 25], omega: [-2, 2, 11], vz: [-1, 1, 5] };
test("centered stick maps to the zero action", () => {
  const a = axesToAction(ZERO_AXES, GRID);
  assert.deepEqual([a.vx, a.vz, a.omega, a.rot], [0, 0, 0, 0]);
});
test("full forward deflection maps to the configured max", () => {
  const a = axesToAction({ ...ZERO_AXES, forward: 1 }, GRID);
  assert.equal(a.vx, 10);
});
test("half deflection is a linear map", () => {
  const a = axesToAction({ ...ZERO_AXES, forward: 0.5 }, GRID);
  assert.equal(a.vx, 5);
});
test("reverse stick cannot go below the forward-velocity floor", () => {
  const a = axesToAction({ ...ZERO_AXES, forward: -1 }, GRID);
  assert.equal(a.vx, 0);
});
test("symmetric axes map both directions", () => {
  assert.equal(axesToAction({ ...ZERO_AXES, turn: 1 }, GRID).omega, 2);
  assert.equal(axesToAction({ ...ZERO_AXES, turn: -1 }, GRID).omega, -2);
  assert.equal(axesToAction({ ...ZERO_AXES, vertical: -0.5 }, GRID).vz, -0.5);
});
test("stick values beyond [-1, 1] are clamped", () => {
  const a = axesToAction({ ...ZERO_AXES, forward: 3 }, GRID);
  assert.equal(a.vx, 10);
});
test("held keys combine and cancel", () => {
  assert.equal(keysToAxes(["KeyW"]).forward, 1);
  assert.equal(keysToAxes(["KeyW", "KeyS"]).forward, 0);
  const both = keysToAxes(["KeyW", "KeyA", "KeyR"]);
  assert.deepEqual([both.forward, both.turn, both.vertical], [1, 1, 1]);
  assert.equal(keysToAxes([]).forward, 0);
});
test("gamepad mapping applies a deadzone", () => {
  assert.equal(gamepadToAxes([0, -0.02, 0, 0]).forward, 0);
  assert.equal(gamepadToAxes([0, -1, 0, 0]).forward, 1);
  assert.equal(gamepadToAxes([0, 0, 0.5, 0]).turn, -0.5);
});
test("gamepad wins over keyboard, keyboard over virtual joystick", () => {
  const tracker = new InputTracker();
  tracker.keyDown("KeyW");
  tracker.virtual = { ...ZERO_AXES, turn: 0.7 };
  const withPad = tracker.sample([0, -1, 0, 0]);
  assert.equal(withPad.forward, 1);
  assert.equal(withPad.turn, 0);
  const noPad = tracker.sample(null);
  assert.equal(noPad.forward, 1);
  tracker.keyUp("KeyW");
  assert.equal(tracker.sample(null).turn, 0.7);
});
test("releaseAll produces an inactive axes sample", () => {
  const tracker = new InputTracker();
  tracker.keyDown("KeyW");
  tracker.virtual = { ...ZERO_AXES, forward: 0.4 };
  tracker.releaseAll();
  assert.ok(!axesActive(tracker.sample(null)));
});
