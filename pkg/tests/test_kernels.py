import os
import subprocess
import sys

import numpy as np
import pytest

from aztec_tangent import _accel, _kernels
from aztec_tangent import sampler as S
from aztec_tangent.exact import WeightPair
from aztec_tangent.lgv import StartConfig

needs_numba = pytest.mark.skipif(not _accel.USE_NUMBA, reason="numba disabled")


@needs_numba
@pytest.mark.parametrize("starts,w", [
    ((0, 1, 2, 3, 4, 5), WeightPair(1, 1)),
    ((0, 2, 3, 5, 8), WeightPair("3/2", "4/5")),
    ((0, 1, 4), WeightPair(0, "5/4")),
])
def test_backends_agree_exactly(starts, w):
    cfg = StartConfig(starts)
    runs = []
    for backend in ("numba", "python"):
        ch = S.Chain(cfg, w, seed=17, backend=backend)
        codes = ch.steps(30000, record_every=97) if cfg.n <= 4 else ch.steps(30000)
        runs.append((ch.state.H.tolist(), ch.state.D.tolist(), ch.state.area, ch.state.diag,
                     ch.accepted, codes.tolist()))
    assert runs[0] == runs[1]


def _random_states(count=20):
    cfg = StartConfig((0, 1, 3, 4, 7, 9))
    snaps = list(S.run_chain(cfg, WeightPair("2/3", "6/5"), count * 5, 0, seed=3, thin=5))
    return cfg, snaps


def test_vertex_accumulators_agree():
    cfg, snaps = _random_states()
    starts = np.array(cfg.starts, dtype=np.int64)
    shape = (cfg.m + 1, cfg.n + 1)
    impls = [_kernels.accumulate_vertices_py, _kernels.accumulate_vertices_np, _kernels.accumulate_vertices]
    out = []
    for fn in impls:
        arrs = [np.zeros(shape, dtype=np.int64) for _ in range(3)]
        for ps in snaps:
            fn(ps.H, ps.D, starts, *arrs)
        out.append([a.tolist() for a in arrs])
    assert out[0] == out[1] == out[2]


def test_vertex_accumulator_matches_path_steps():
    cfg, snaps = _random_states(5)
    starts = np.array(cfg.starts, dtype=np.int64)
    for ps in snaps:
        arrs = [np.zeros((cfg.m + 1, cfg.n + 1), dtype=np.int64) for _ in range(3)]
        _kernels.accumulate_vertices_np(ps.H, ps.D, starts, *arrs)
        want = [np.zeros_like(a) for a in arrs]
        for p in ps.paths():
            for (x, y), step in zip(p.vertices(), p.steps):
                want["ULD".index(step.value)][x, y] += 1
        assert [a.tolist() for a in arrs] == [a.tolist() for a in want]


def test_env_flag_selects_interpreted_kernels():
    env = dict(os.environ, **{_accel.DISABLE_ENV: "1"})
    code = ("from aztec_tangent import _accel, _kernels; "
            "print(_accel.USE_NUMBA, hasattr(_kernels.mcmc_kernel, 'py_func'), "
            "_kernels.accumulate_vertices is _kernels.accumulate_vertices_np)")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["False", "False", "True"]


def test_python_backend_requested_explicitly():
    cfg, w = StartConfig((0, 1, 2)), WeightPair(1, 1)
    ch = S.Chain(cfg, w, seed=0, backend="python")
    ch.sweeps(10)
    assert ch.state.is_non_intersecting()
