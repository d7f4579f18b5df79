"""Length-prefixed binary scan log for map replay.

Record layout (little-endian), one per scan, after an 8-byte magic header:

    u32  payload length (bytes following this field)
    f64  stamp
    u16  sensor_id length, then that many UTF-8 bytes
    7xf64 sensor pose (tx, ty, tz, qw, qx, qy, qz)
    u32  point count N
    Nx3xf64 points in the sensor frame
"""

import struct

import numpy as np

from .geometry import Pose
from .localmap import SensorScan

MAGIC = b"MPSCAN1\n"


def write_scanlog(path, scans):
    with open(path, "wb") as f:
        f.write(MAGIC)
        for scan in scans:
            sid = scan.sensor_id.encode("utf-8")
            pts = np.asarray(scan.points, dtype="<f8").reshape(-1, 3)
            payload = b"".join([
                struct.pack("<d", float(scan.stamp)),
                struct.pack("<H", len(sid)), sid,
                np.asarray(scan.sensor_pose.flat(), dtype="<f8").tobytes(),
                struct.pack("<I", pts.shape[0]),
                pts.tobytes(),
            ])
            f.write(struct.pack("<I", len(payload)))
            f.write(payload)


def read_scanlog(path):
    scans = []
    with open(path, "rb") as f:
        if f.read(len(MAGIC)) != MAGIC:
            raise ValueError(f"{path} is not a scan log (bad magic)")
        while True:
            head = f.read(4)
            if not head:
                break
            if len(head) < 4:
                raise ValueError("truncated scan log record header")
            (n,) = struct.unpack("<I", head)
            payload = f.read(n)
            if len(payload) < n:
                raise ValueError("truncated scan log record")
            off = 0
            (stamp,) = struct.unpack_from("<d", payload, off)
            off += 8
            (slen,) = struct.unpack_from("<H", payload, off)
            off += 2
            sid = payload[off:off + slen].decode("utf-8")
            off += slen
            pose = Pose.from_flat(np.frombuffer(payload, dtype="<f8", count=7, offset=off))
            off += 7 * 8
            (count,) = struct.unpack_from("<I", payload, off)
            off += 4
            pts = np.frombuffer(payload, dtype="<f8", count=3 * count,
                                offset=off).reshape(-1, 3).copy()
            scans.append(SensorScan(points=pts, sensor_pose=pose, stamp=stamp,
                                    sensor_id=sid))
    return scans


def replay_into_map(scans, local_map):
    """Feed logged scans (stamp order) into a LocalMap; returns it."""
    for scan in sorted(scans, key=lambda s: (s.stamp, s.sensor_id)):
        local_map.integrate(scan)
    return local_map
