// Cockpit-side session state: the decimated voxel map maintained from
// diff messages, latest vehicle state, trajectory library, and rolling
// telemetry buffers. Pure data handling, no DOM.

import {
  ChosenMsg,
  ConfigMsg,
  LibraryMsg,
  ServerMsg,
  StateMsg,
  checksumVoxels,
  voxelKey,
} from "./protocol";

/** Fixed-capacity (t, value) ring. */
export class RingBuffer {
  readonly capacity: number;
  times: number[] = [];
  values: number[] = [];

  constructor(capacity: number) {
    this.capacity = capacity;
  }

  push(t: number, v: number): void {
    this.times.push(t);
    this.values.push(v);
    if (this.times.length > this.capacity) {
      this.times.shift();
      this.values.shift();
    }
  }

  get length(): number {
    return this.times.length;
  }
}

export interface PrunedInterval {
  start: number;
  end: number;
}

export interface ChecksumStatus {
  checked: number;
  mismatches: number;
  lastOk: boolean | null;
}

const BUFFER_CAPACITY = 600; // ~24 s of 25 Hz cycles
const INTERVAL_CAP = 200;

export class CockpitState {
  config: ConfigMsg | null = null;
  voxels = new Map<string, number[]>(); // index key -> center (for drawing)
  latest: StateMsg | null = null;
  library: LibraryMsg | null = null;
  chosen: ChosenMsg | null = null;
  speed = new RingBuffer(BUFFER_CAPACITY);
  accel = new RingBuffer(BUFFER_CAPACITY);
  clearance = new RingBuffer(BUFFER_CAPACITY);
  altitude = new RingBuffer(BUFFER_CAPACITY);
  prunedIntervals: PrunedInterval[] = [];
  checksum: ChecksumStatus = { checked: 0, mismatches: 0, lastOk: null };
  messagesSeen = 0;
  trail: [number, number][] = [];

  get voxelSize(): number {
    return this.config?.voxel_size ?? 0.2;
  }

  apply(msg: ServerMsg): void {
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
        const ok = this.voxels.size === msg.count
          && checksumVoxels(this.voxels.keys()) === msg.fnv;
        this.checksum.checked += 1;
        if (!ok) this.checksum.mismatches += 1;
        this.checksum.lastOk = ok;
        break;
      }
      case "chosen":
        this.chosen = msg;
        if (msg.clearance !== null && msg.clearance !== undefined) {
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
  private markPruned(t: number): void {
    const last = this.prunedIntervals[this.prunedIntervals.length - 1];
    if (last && t - last.end <= 0.25) {
      last.end = t;
    } else {
      this.prunedIntervals.push({ start: t, end: t });
      if (this.prunedIntervals.length > INTERVAL_CAP) this.prunedIntervals.shift();
    }
  }
}
