// test/state.test.ts
import assert from "node:assert/strict";
import { test } from "node:test";

// src/protocol.ts
function fnv1a32(text) {
  const bytes = new TextEncoder().encode(text);
  let h = 2166136261;
  for (const b of bytes) {
    h = Math.imul(h ^ b, 16777619) >>> 0;
  }
  return h.toString(16).padStart(8, "0");
}
function voxelIndex(center2, voxelSize) {
  return [
    Math.round(center2[0] / voxelSize - 0.5),
    Math.round(center2[1] / voxelSize - 0.5),
    Math.round(center2[2] / voxelSize - 0.5)
  ];
}
function voxelKey(center2, voxelSize) {
  const [ix, iy, iz] = voxelIndex(center2, voxelSize);
  return `${ix},${iy},${iz}`;
}
function checksumVoxels(keys) {
  const idx = [...keys].map((k) => k.split(",").map(Number));
  idx.sort((a, b) => a[0] - b[0] || a[1] - b[1] || a[2] - b[2]);
  return fnv1a32(idx.map((v) => `${v[0]},${v[1]},${v[2]};`).join(""));
}

// src/state.ts
var RingBuffer = class {
  constructor(capacity) {
    this.times = [];
    this.values = [];
    this.capacity = capacity;
  }
  push(t, v) {
    this.times.push(t);
    this.values.push(v);
    if (this.times.length > this.capacity) {
      this.times.shift();
      this.values.shift();
    }
  }
  get length() {
    return this.times.length;
  }
};
var BUFFER_CAPACITY = 600;
var INTERVAL_CAP = 200;
var CockpitState = class {
  constructor() {
    this.config = null;
    this.voxels = /* @__PURE__ */ new Map();
    // index key -> center (for drawing)
    this.latest = null;
    this.library = null;
    this.chosen = null;
    this.speed = new RingBuffer(BUFFER_CAPACITY);
    this.accel = new RingBuffer(BUFFER_CAPACITY);
    this.clearance = new RingBuffer(BUFFER_CAPACITY);
    this.altitude = new RingBuffer(BUFFER_CAPACITY);
    this.prunedIntervals = [];
    this.checksum = { checked: 0, mismatches: 0, lastOk: null };
    this.messagesSeen = 0;
    this.trail = [];
  }
  get voxelSize() {
    return this.config?.voxel_size ?? 0.2;
  }
  apply(msg) {
    this.messagesSeen += 1;
    switch (msg.type) {
      case "config":
        this.config = msg;
        this.voxels.clear();
        break;
      case "state":
        this.latest = msg;
        this.speed.push(msg.t, msg.speed);
        this.accel.push(msg.t, Math.hypot(...msg.accel));
        this.altitude.push(msg.t, msg.pos[2]);
        this.trail.push([msg.pos[0], msg.pos[1]]);
        if (this.trail.length > BUFFER_CAPACITY) this.trail.shift();
        break;
      case "map_diff": {
        const vs = this.voxelSize;
        for (const c of msg.add) this.voxels.set(voxelKey(c, vs), c);
        for (const c of msg.remove) this.voxels.delete(voxelKey(c, vs));
        break;
      }
      case "map_sum": {
        const ok = this.voxels.size === msg.count && checksumVoxels(this.voxels.keys()) === msg.fnv;
        this.checksum.checked += 1;
        if (!ok) this.checksum.mismatches += 1;
        this.checksum.lastOk = ok;
        break;
      }
      case "chosen":
        this.chosen = msg;
        if (msg.clearance !== null && msg.clearance !== void 0) {
          this.clearance.push(msg.t, msg.clearance);
        }
        if (msg.pruned) this.markPruned(msg.t);
        break;
      case "library":
        this.library = msg;
        break;
    }
  }
  /** Extend the open pruned interval or start a new one. */
  markPruned(t) {
    const last = this.prunedIntervals[this.prunedIntervals.length - 1];
    if (last && t - last.end <= 0.25) {
      last.end = t;
    } else {
      this.prunedIntervals.push({ start: t, end: t });
      if (this.prunedIntervals.length > INTERVAL_CAP) this.prunedIntervals.shift();
    }
  }
};

// test/state.test.ts
var CONFIG = {
  type: "config",
  scenario: "t",
  voxel_size: 0.2,
  r: 0.4,
  r_v: 0.3,
  grid: { vx: [0, 10, 25], omega: [-2, 2, 11], vz: [-1, 1, 5] },
  rates: { plan: 25, map: 30, track: 100 },
  start: [0, 0, 2],
  bounds: [[-5, -5, 0], [5, 5, 5]],
  world: []
};
function center(ix, iy, iz) {
  return [(ix + 0.5) * 0.2, (iy + 0.5) * 0.2, (iz + 0.5) * 0.2];
}
function stateMsg(t, speed = 1, z = 2) {
  return {
    type: "state",
    t,
    pos: [t, 0, z],
    vel: [speed, 0, 0],
    yaw: 0,
    speed,
    accel: [0.5, 0, 0]
  };
}
test("map diffs maintain the voxel set", () => {
  const s = new CockpitState();
  s.apply(CONFIG);
  s.apply({ type: "map_diff", add: [center(0, 0, 0), center(1, 2, 3)], remove: [] });
  assert.equal(s.voxels.size, 2);
  s.apply({ type: "map_diff", add: [center(-1, 5, 2)], remove: [center(0, 0, 0)] });
  assert.equal(s.voxels.size, 2);
  assert.ok(s.voxels.has("1,2,3"));
  assert.ok(s.voxels.has("-1,5,2"));
  assert.ok(!s.voxels.has("0,0,0"));
});
test("diff stream reproduces the server checksum", () => {
  const s = new CockpitState();
  s.apply(CONFIG);
  s.apply({
    type: "map_diff",
    add: [center(1, 2, 3), center(-1, 5, 2), center(0, 0, 0)],
    remove: []
  });
  const sum = { type: "map_sum", count: 3, fnv: "aa553f33" };
  s.apply(sum);
  assert.equal(s.checksum.lastOk, true);
  assert.equal(s.checksum.mismatches, 0);
});
test("checksum mismatch is detected and counted", () => {
  const s = new CockpitState();
  s.apply(CONFIG);
  s.apply({ type: "map_diff", add: [center(0, 0, 0)], remove: [] });
  s.apply({ type: "map_sum", count: 2, fnv: "deadbeef" });
  assert.equal(s.checksum.lastOk, false);
  assert.equal(s.checksum.mismatches, 1);
});
test("self-consistency with the local checksum helper", () => {
  const s = new CockpitState();
  s.apply(CONFIG);
  const adds = [center(4, 4, 4), center(-3, 0, 1), center(7, -2, 0)];
  s.apply({ type: "map_diff", add: adds, remove: [] });
  s.apply({ type: "map_sum", count: 3, fnv: checksumVoxels(s.voxels.keys()) });
  assert.equal(s.checksum.lastOk, true);
});
test("ring buffers never exceed capacity", () => {
  const r = new RingBuffer(5);
  for (let i = 0; i < 20; i++) r.push(i, i * 2);
  assert.equal(r.length, 5);
  assert.deepEqual(r.times, [15, 16, 17, 18, 19]);
  assert.deepEqual(r.values, [30, 32, 34, 36, 38]);
});
test("state messages fill telemetry buffers and the trail", () => {
  const s = new CockpitState();
  s.apply(CONFIG);
  for (let i = 0; i < 700; i++) s.apply(stateMsg(i * 0.04, 2 + i * 0.01));
  assert.equal(s.speed.length, 600);
  assert.equal(s.accel.length, 600);
  assert.equal(s.altitude.length, 600);
  assert.equal(s.trail.length, 600);
  assert.ok(s.latest && s.latest.speed > 8);
});
test("pruned cycles merge into contiguous shaded intervals", () => {
  const s = new CockpitState();
  const chosen = (t, pruned) => ({ type: "chosen", t, points: [], pruned, emergency: false, clearance: 1 });
  for (const t of [1, 1.04, 1.08, 1.12]) s.apply(chosen(t, true));
  s.apply(chosen(1.16, false));
  for (const t of [2, 2.04]) s.apply(chosen(t, true));
  assert.equal(s.prunedIntervals.length, 2);
  assert.deepEqual(s.prunedIntervals[0], { start: 1, end: 1.12 });
  assert.deepEqual(s.prunedIntervals[1], { start: 2, end: 2.04 });
  assert.equal(s.clearance.length, 7);
});
test("config reset clears stale voxels", () => {
  const s = new CockpitState();
  s.apply(CONFIG);
  s.apply({ type: "map_diff", add: [center(0, 0, 0)], remove: [] });
  s.apply({ ...CONFIG });
  assert.equal(s.voxels.size, 0);
});
