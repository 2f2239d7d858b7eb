import json
import os
import subprocess
import sys

import numpy as np

from twocenter3d import _accel
from twocenter3d.miniball import smallest_enclosing_ball

SCRIPT = r"""
import json, sys
import numpy as np
from twocenter3d import _accel
from twocenter3d.miniball import smallest_enclosing_ball
from twocenter3d.solver import SolverConfig, brute_force_decide, optimize_reference, solve
out = {"backend": _accel.BACKEND, "seb": [], "opt": [], "variants": []}
for seed in range(4):
    P = np.random.default_rng(seed).normal(size=(8, 3))
    out["seb"].append(smallest_enclosing_ball(P).radius)
    r = optimize_reference(P).radius
    out["opt"].append(r)
    out["variants"].append([brute_force_decide(P, r * f).variant for f in (0.999, 1.0, 1.001)])
    out["opt"].append(solve(P, SolverConfig(algorithm="improved")).radius)
json.dump(out, sys.stdout)
"""


def _run(disable):
    env = dict(os.environ)
    env.pop("TWOCENTER3D_DISABLE_NUMBA", None)
    if disable:
        env["TWOCENTER3D_DISABLE_NUMBA"] = "1"
    res = subprocess.run([sys.executable, "-c", SCRIPT], env=env, capture_output=True, text=True,
                         timeout=600, check=True)
    return json.loads(res.stdout)


def test_numpy_fallback_matches_default():
    slow = _run(True)
    fast = _run(False)
    assert slow["backend"] == "numpy"
    np.testing.assert_allclose(slow["seb"], fast["seb"], rtol=1e-12)
    np.testing.assert_allclose(slow["opt"], fast["opt"], rtol=1e-9)
    assert slow["variants"] == fast["variants"]


def test_kernels_match_direct_computation():
    rng = np.random.default_rng(1)
    P = rng.normal(size=(9, 3))
    order = np.arange(9)
    masks = rng.random((5, 9)) < 0.5
    got = _accel.mask_batch_radii(P, masks, order)
    for m, (r1, r2) in zip(masks, got):
        want1 = smallest_enclosing_ball(P[m]).radius if m.any() else -1.0
        want2 = smallest_enclosing_ball(P[~m]).radius if (~m).any() else -1.0
        assert np.isclose(r1, want1, atol=1e-12) or (r1 < 0 and want1 < 0)
        assert np.isclose(r2, want2, atol=1e-12) or (r2 < 0 and want2 < 0)
