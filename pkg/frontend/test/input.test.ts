import assert from "node:assert/strict";
import { test } from "node:test";

import {
  axesActive,
  axesToAction,
  gamepadToAxes,
  InputTracker,
  keysToAxes,
  ZERO_AXES,
} from "../src/input";
import { GridSpec } from "../src/protocol";

const GRID: GridSpec = { vx: [0, 10, 25], omega: [-2, 2, 11], vz: [-1, 1, 5] };

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
  assert.equal(a.vx, 5.0);
});

test("reverse stick cannot go below the forward-velocity floor", () => {
  const a = axesToAction({ ...ZERO_AXES, forward: -1 }, GRID);
  assert.equal(a.vx, 0); // vx bounds are [0, 10]
});

test("symmetric axes map both directions", () => {
  assert.equal(axesToAction({ ...ZERO_AXES, turn: 1 }, GRID).omega, 2);
  assert.equal(axesToAction({ ...ZERO_AXES, turn: -1 }, GRID).omega, -2);
  assert.equal(axesToAction({ ...ZERO_AXES, vertical: -0.5 }, GRID).vz, -0.5);
});

test("stick values beyond [-1, 1] are clamped", () => {
  const a = axesToAction({ ...ZERO_AXES, forward: 3.0 }, GRID);
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
  assert.equal(noPad.forward, 1);        // keyboard layer
  tracker.keyUp("KeyW");
  assert.equal(tracker.sample(null).turn, 0.7); // virtual fallback
});

test("releaseAll produces an inactive axes sample", () => {
  const tracker = new InputTracker();
  tracker.keyDown("KeyW");
  tracker.virtual = { ...ZERO_AXES, forward: 0.4 };
  tracker.releaseAll();
  assert.ok(!axesActive(tracker.sample(null)));
});
