"""Command-line front end.

    mpteleop run --scenario pillar_slalom --metrics out.csv
    mpteleop run --scenario head_on_wall --mode live --listen 127.0.0.1:8765
    mpteleop bench
    mpteleop scenarios
    mpteleop replay --log scans.bin
"""

import argparse
import sys

import numpy as np


def _parse_listen(s):
    host, _, port = s.rpartition(":")
    return (host or "127.0.0.1", int(port))


def _build_parser():
    p = argparse.ArgumentParser(prog="mpteleop",
                                description="Motion-primitive teleoperation sandbox")
    sub = p.add_subparsers(dest="cmd", required=True)

    run = sub.add_parser("run", help="run a scenario session")
    run.add_argument("--scenario", required=True,
                     help="path to a scenario JSON or a shipped scenario name")
    run.add_argument("--trace", help="CSV input trace (t,vx,vz,omega,rot), "
                                     "overrides the scenario trace")
    run.add_argument("--mode", choices=("scripted", "live"), default="scripted")
    run.add_argument("--listen", type=_parse_listen, metavar="HOST:PORT",
                     help="telemetry/teleop endpoint (live mode)")
    run.add_argument("--metrics", help="CSV output path (plus .summary.json)")
    run.add_argument("--seed", type=int)
    run.add_argument("--realtime", choices=("on", "off"),
                     help="wall-clock pacing (default: on for live)")
    run.add_argument("--duration", type=float)
    run.add_argument("--r", type=float, help="collision radius override")
    run.add_argument("--r-v", dest="r_v", type=float, help="vehicle radius override")
    run.add_argument("--T", dest="t_base", type=float,
                     help="primitive duration override")
    run.add_argument("--v-max", dest="v_max", type=float,
                     help="forward velocity bound override")
    run.add_argument("--voxel-size", dest="voxel_size", type=float)
    run.add_argument("--record-scans", dest="record_scans",
                     help="write all simulated scans to a binary scan log")
    run.add_argument("--renew-last-action", action="store_true",
                     help="on input dropout keep the last action instead of stopping")

    bench = sub.add_parser("bench", help="compare numba and numpy kernel lanes")
    bench.add_argument("--repeats", type=int, default=3)

    sub.add_parser("scenarios", help="list shipped scenarios")

    rep = sub.add_parser("replay", help="rebuild a local map from a scan log")
    rep.add_argument("--log", required=True)
    rep.add_argument("--voxel-size", type=float, default=0.2)
    rep.add_argument("--alpha-k", type=float, default=2.0)
    rep.add_argument("--alpha-s", type=float, default=0.2)
    rep.add_argument("--beta-s", type=float, default=0.1)
    return p


def _cmd_run(args):
    from .scenario import Scenario, apply_overrides
    from .session import Session

    try:
        scn = Scenario.load(args.scenario)
        if args.trace:
            rows = np.loadtxt(args.trace, delimiter=",", ndmin=2)
            if rows.shape[1] != 5:
                raise ValueError("trace rows must be t,vx,vz,omega,rot")
            scn.trace = rows
        apply_overrides(scn, r=args.r, r_v=args.r_v, t_base=args.t_base,
                        v_max=args.v_max, voxel_size=args.voxel_size,
                        duration=args.duration, seed=args.seed)
        listen = args.listen
        if args.mode == "live" and listen is None:
            listen = ("127.0.0.1", 8765)
        session = Session(
            scn, mode=args.mode, listen=listen, metrics_path=args.metrics,
            realtime=None if args.realtime is None else args.realtime == "on",
            record_scans=args.record_scans,
            renew_last_action=args.renew_last_action, quiet=False)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    if args.mode == "live":
        print(f"listening on ws://{listen[0]}:{listen[1]}  "
              f"(scenario {scn.name}, {scn.duration}s)")
    return session.run().exit_code


def _cmd_replay(args):
    from .localmap import LocalMap
    from .scanlog import read_scanlog, replay_into_map

    try:
        scans = read_scanlog(args.log)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    lm = LocalMap(voxel_size=args.voxel_size, alpha_k=args.alpha_k,
                  alpha_s=args.alpha_s, beta_s=args.beta_s)
    replay_into_map(scans, lm)
    print(f"{len(scans)} scans -> current KF window {lm.current_points.shape[0]} "
          f"voxels, previous {lm.previous_points.shape[0]}, "
          f"buffer {lm.buffer_points.shape[0]}")
    return 0


def main(argv=None):
    args = _build_parser().parse_args(argv)
    if args.cmd == "run":
        return _cmd_run(args)
    if args.cmd == "bench":
        from . import bench
        bench.main(repeats=args.repeats)
        return 0
    if args.cmd == "scenarios":
        from .scenario import shipped_names
        for name in shipped_names():
            print(name)
        return 0
    if args.cmd == "replay":
        return _cmd_replay(args)
    return 1


if __name__ == "__main__":
    sys.exit(main())
