import pytest

from mpteleop import backend


def _lanes():
    lanes = ["numpy"]
    if backend._numba_available():
        lanes.insert(0, "numba")
    return lanes


@pytest.fixture(params=_lanes())
def kernel_lane(request):
    """Run the test under each available kernel lane, restoring afterwards."""
    previous = backend.active_lane
    backend.use(request.param)
    yield request.param
    backend.use(previous)
