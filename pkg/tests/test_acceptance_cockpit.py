"""Secondary acceptance: the browser cockpit's scripted-socket check.

Runs a live session for 60+ seconds while the compiled cockpit state
machine (driven by node) streams operator input and verifies that
replaying the map_diff stream reproduces every periodic checksum. The
blur fail-safe is covered by the frontend unit tests (it needs a browser
event loop); steering through the pillar scenario by hand is the manual
half of this criterion.
"""

import json
import shutil
import subprocess
import threading
import time
from contextlib import contextmanager
from pathlib import Path

import pytest

from mpteleop.scenario import Scenario, apply_overrides
from mpteleop.session import Session

FRONTEND = Path(__file__).resolve().parent.parent / "frontend"
CHECK = FRONTEND / "dist" / "scripted-check.mjs"


@contextmanager
def criterion(name):
    try:
        yield
    except BaseException:
        print(f"\nACCEPTANCE {name}: FAIL")
        raise
    print(f"\nACCEPTANCE {name}: PASS")


needs_cockpit = pytest.mark.skipif(
    shutil.which("node") is None or not CHECK.exists(),
    reason="cockpit bundle not built (cd frontend && npm install && npm run build)")


@needs_cockpit
def test_cockpit_scripted_socket_check():
    with criterion("cockpit-loop"):
        scn = apply_overrides(Scenario.load("arena"), duration=70.0)
        session = Session(scn, mode="live", listen=("127.0.0.1", 0),
                          realtime=True)
        result = {}

        def run():
            result["res"] = session.run()

        th = threading.Thread(target=run, daemon=True)
        th.start()
        deadline = time.monotonic() + 10
        while not hasattr(session, "bound_port"):
            assert time.monotonic() < deadline, "session did not start"
            time.sleep(0.05)

        proc = subprocess.run(
            ["node", str(CHECK), "--url",
             f"ws://127.0.0.1:{session.bound_port}", "--duration", "60"],
            capture_output=True, text=True, timeout=90)
        print(proc.stdout)
        assert proc.returncode == 0, proc.stdout + proc.stderr
        report = json.loads(proc.stdout)
        assert report["ok"]
        assert report["checksums"]["checked"] >= 50      # ~1 Hz over 60 s
        assert report["checksums"]["mismatches"] == 0
        assert report["voxels"] > 0
        assert report["maxSpeed"] > 2.0                  # input actually steered

        th.join(timeout=30)
        assert not th.is_alive()
        assert result["res"].summary["min_gt_clearance"] >= scn.r_v
