// Wire protocol types and helpers. The server sends one JSON object per
// WebSocket text frame; unknown message types are dropped and unknown
// fields ignored (forward compatibility).

export interface GridSpec {
  vx: [number, number, number];
  omega: [number, number, number];
  vz: [number, number, number];
}

export interface ConfigMsg {
  type: "config";
  scenario: string;
  grid: GridSpec;
  r: number;
  r_v: number;
  voxel_size: number;
  rates: { plan: number; map: number; track: number };
  start: number[];
  bounds: number[][];
  world: WorldShape[];
}

export interface WorldShape {
  type: string;
  center?: number[];
  radius?: number;
  min?: number[];
  max?: number[];
  p1?: number[];
  p2?: number[];
}

export interface StateMsg {
  type: "state";
  t: number;
  pos: [number, number, number];
  vel: [number, number, number];
  yaw: number;
  speed: number;
  accel: [number, number, number];
}

export interface MapDiffMsg {
  type: "map_diff";
  add: number[][];
  remove: number[][];
}

export interface MapSumMsg {
  type: "map_sum";
  count: number;
  fnv: string;
}

export interface ChosenMsg {
  type: "chosen";
  t: number;
  points: number[][];
  pruned: boolean;
  emergency: boolean;
  clearance: number | null;
}

export interface LibraryMsg {
  type: "library";
  t: number;
  trajs: number[][][];
  chosen: number;
  op: number;
  pruned: boolean;
}

export type ServerMsg =
  | ConfigMsg | StateMsg | MapDiffMsg | MapSumMsg | ChosenMsg | LibraryMsg;

const KNOWN_TYPES = new Set(
  ["config", "state", "map_diff", "map_sum", "chosen", "library"]);

/** Parse one frame; null for unknown/invalid messages (never throws). */
export function parseMessage(raw: string): ServerMsg | null {
  let obj: unknown;
  try {
    obj = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof obj !== "object" || obj === null) return null;
  const type = (obj as { type?: unknown }).type;
  if (typeof type !== "string" || !KNOWN_TYPES.has(type)) return null;
  return obj as ServerMsg;
}

export function actionMessage(
  vx: number, vz: number, omega: number, rot: number): string {
  return JSON.stringify({
    type: "action", vx, vz, omega, rot, stamp: Date.now() / 1000,
  });
}

/** FNV-1a 32-bit, hex; must match the server's implementation. */
export function fnv1a32(text: string): string {
  const bytes = new TextEncoder().encode(text);
  let h = 0x811c9dc5;
  for (const b of bytes) {
    h = Math.imul(h ^ b, 0x01000193) >>> 0;
  }
  return h.toString(16).padStart(8, "0");
}

/** Voxel index from a center coordinate, mirroring the server's rounding. */
export function voxelIndex(center: number[], voxelSize: number): [number, number, number] {
  return [
    Math.round(center[0] / voxelSize - 0.5),
    Math.round(center[1] / voxelSize - 0.5),
    Math.round(center[2] / voxelSize - 0.5),
  ];
}

export function voxelKey(center: number[], voxelSize: number): string {
  const [ix, iy, iz] = voxelIndex(center, voxelSize);
  return `${ix},${iy},${iz}`;
}

/** Checksum of the maintained voxel set: FNV-1a over sorted "ix,iy,iz;". */
export function checksumVoxels(keys: Iterable<string>): string {
  const idx = [...keys].map((k) => k.split(",").map(Number));
  idx.sort((a, b) => a[0] - b[0] || a[1] - b[1] || a[2] - b[2]);
  return fnv1a32(idx.map((v) => `${v[0]},${v[1]},${v[2]};`).join(""));
}
