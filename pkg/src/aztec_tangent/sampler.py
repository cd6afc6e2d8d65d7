"""Metropolis sampling of weighted non-intersecting Schroeder path systems."""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional

import numpy as np

from . import _kernels
from .exact import LatticePath, SizeLimitError, Step, WeightPair, path_area_and_diag
from .lgv import StartConfig

ENUM_LIMIT = 10 ** 6
WORKERS_ENV = "AZTEC_TANGENT_WORKERS"


@dataclass
class PathSystem:
    cfg: StartConfig
    H: np.ndarray
    D: np.ndarray
    area: int = 0
    diag: int = 0

    def copy(self) -> "PathSystem":
        return PathSystem(self.cfg, self.H.copy(), self.D.copy(), self.area, self.diag)

    def arrival(self, i: int, x: int) -> int:
        if x == self.cfg.starts[i]:
            return 0
        return int(self.H[i, x + 1] + self.D[i, x + 1])

    def paths(self) -> list[LatticePath]:
        out = []
        for i, a in enumerate(self.cfg.starts):
            steps: list[Step] = []
            for x in range(a, -1, -1):
                steps += [Step.UP] * int(self.H[i, x] - self.arrival(i, x))
                if x >= 1:
                    steps.append(Step.DIAG if self.D[i, x] else Step.LEFT)
            out.append(LatticePath(a, tuple(steps)))
        return out

    def key(self) -> tuple[str, ...]:
        return tuple(str(p) for p in self.paths())

    @classmethod
    def from_paths(cls, cfg: StartConfig, paths: list[LatticePath]) -> "PathSystem":
        H, D = _blank(cfg)
        for i, p in enumerate(paths):
            if p.start != cfg.starts[i]:
                raise ValueError(f"path {i} starts at {p.start}, expected {cfg.starts[i]}")
            x, y = p.start, 0
            for s in p.steps:
                if s is Step.UP:
                    y += 1
                else:
                    H[i, x] = y
                    D[i, x] = 1 if s is Step.DIAG else 0
                    x -= 1
                    y += 1 if s is Step.DIAG else 0
            if x != 0 or y != i:
                raise ValueError(f"path {i} ends at {(x, y)}, expected {(0, i)}")
            H[i, 0] = y
        ps = cls(cfg, H, D)
        ps.area, ps.diag = ps.recompute()
        return ps

    @classmethod
    def from_key(cls, cfg: StartConfig, key: tuple[str, ...]) -> "PathSystem":
        return cls.from_paths(cfg, [LatticePath.from_string(a, k) for a, k in zip(cfg.starts, key)])

    def recompute(self) -> tuple[int, int]:
        area = diag = 0
        for p in self.paths():
            a, d = path_area_and_diag(p)
            area += a
            diag += d
        return area, diag

    def is_non_intersecting(self) -> bool:
        seen: set[tuple[int, int]] = set()
        for i, p in enumerate(self.paths()):
            verts = p.vertices()
            if verts[-1] != (0, i):
                return False
            for v in verts:
                if v in seen:
                    return False
                seen.add(v)
        return True

    def weight(self, w: WeightPair) -> Fraction:
        return w.gamma ** self.diag * w.q ** self.area


def _blank(cfg: StartConfig) -> tuple[np.ndarray, np.ndarray]:
    H = np.zeros((cfg.n + 1, cfg.m + 1), dtype=np.int64)
    D = np.zeros((cfg.n + 1, cfg.m + 1), dtype=np.int64)
    return H, D


def sites(cfg: StartConfig) -> tuple[np.ndarray, np.ndarray]:
    """Movable (path, column) pairs: every column x >= 1 of every path i >= 1."""
    ii, xx = [], []
    for i in range(1, cfg.n + 1):
        for x in range(1, cfg.starts[i] + 1):
            ii.append(i)
            xx.append(x)
    return np.array(ii, dtype=np.int64), np.array(xx, dtype=np.int64)


def extremal_config(cfg: StartConfig, mode: str = "min_area") -> PathSystem:
    H, D = _blank(cfg)
    starts = cfg.starts
    if mode == "max_area":
        for i, a in enumerate(starts):
            H[i, : a + 1] = i
    elif mode == "min_area":
        for i in range(1, cfg.n + 1):
            e = 0
            for x in range(starts[i], 0, -1):
                need = H[i - 1, x - 1] + 1 if x - 1 <= starts[i - 1] else 0
                if e >= need:
                    H[i, x], D[i, x] = e, 0
                else:
                    # rise as late as possible; one diagonal is cheaper than an up step
                    H[i, x], D[i, x] = need - 1, 1
                e = H[i, x] + D[i, x]
            H[i, 0] = i
    else:
        raise ValueError(f"unknown mode {mode!r}")
    ps = PathSystem(cfg, H, D)
    ps.area, ps.diag = ps.recompute()
    return ps


def _enumerate_states(cfg: StartConfig, limit: int) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    n, starts = cfg.n, cfg.starts
    H, D = _blank(cfg)
    count = [0]

    def path(i: int, x: int, e: int):
        if x == 0:
            if e != i:
                return
            H[i, 0] = i
            if i == n:
                count[0] += 1
                if count[0] > limit:
                    raise SizeLimitError(f"more than {limit} states")
                yield H.copy(), D.copy()
            else:
                yield from path(i + 1, starts[i + 1], 0)
            return
        below = H[i - 1, x - 1] if x - 1 <= starts[i - 1] else -1
        for h in range(e, i + 1):
            for d in (0, 1):
                arr = h + d
                if arr > i or arr <= below:
                    continue
                H[i, x], D[i, x] = h, d
                yield from path(i, x - 1, arr)

    if n == 0:
        yield H.copy(), D.copy()
        return
    yield from path(1, starts[1], 0)


def enumerate_systems(cfg: StartConfig, limit: int = ENUM_LIMIT) -> Iterator[PathSystem]:
    for H, D in _enumerate_states(cfg, limit):
        ps = PathSystem(cfg, H, D)
        ps.area, ps.diag = ps.recompute()
        yield ps


def exact_enumerate_small(cfg: StartConfig, w: WeightPair, limit: int = ENUM_LIMIT) -> dict[tuple[str, ...], Fraction]:
    """Every non-intersecting system mapped to its weight ``gamma^k q^area``."""
    return {ps.key(): ps.weight(w) for ps in enumerate_systems(cfg, limit)}


def state_code(ps: PathSystem) -> int:
    """Integer code of a state, identical to the one recorded by the kernel."""
    si, sx = sites(ps.cfg)
    base = 2 * (ps.cfg.n + 1)
    code = 0
    for j in range(len(si) - 1, -1, -1):
        code = code * base + 2 * int(ps.H[si[j], sx[j]]) + int(ps.D[si[j], sx[j]])
    return code


def _kernel(backend: str):
    if backend == "python":
        return getattr(_kernels.mcmc_kernel, "py_func", _kernels.mcmc_kernel_py)
    if backend == "numba" and not hasattr(_kernels.mcmc_kernel, "py_func"):
        raise RuntimeError("numba backend requested but numba is disabled")
    return _kernels.mcmc_kernel


class Chain:
    """A single Metropolis chain owning its state and random generator."""

    def __init__(self, cfg: StartConfig, w: WeightPair, seed: int = 0, start: str = "min_area",
                 backend: str = "auto", state: Optional[PathSystem] = None):
        self.cfg = cfg
        self.state = state.copy() if state is not None else extremal_config(cfg, start)
        self.rng = np.random.default_rng(seed)
        self.site_i, self.site_x = sites(cfg)
        self.starts = np.array(cfg.starts, dtype=np.int64)
        self.gamma_zero = w.gamma == 0
        self.log_g = 0.0 if self.gamma_zero else math.log(w.gamma)
        self.log_q = math.log(w.q)
        self.kernel = _kernel(backend)
        self.accepted = 0
        self.code_base = 2 * (cfg.n + 1)

    @property
    def sites_per_sweep(self) -> int:
        return len(self.site_i)

    def steps(self, count: int, record_every: int = 0) -> np.ndarray:
        """Run ``count`` single-site updates; optionally record state codes."""
        codes = np.zeros(count // record_every if record_every else 0, dtype=np.int64)
        S = self.sites_per_sweep
        if S == 0 or count == 0:
            return codes
        picks = self.rng.integers(0, S, size=count)
        moves = self.rng.integers(0, 6, size=count)
        uniforms = self.rng.random(count)
        stats = np.array([self.state.area, self.state.diag, 0], dtype=np.int64)
        self.kernel(self.state.H, self.state.D, self.starts, self.site_i, self.site_x, picks, moves,
                    uniforms, self.log_g, self.log_q, self.gamma_zero, stats, codes, record_every,
                    self.code_base)
        self.state.area, self.state.diag = int(stats[0]), int(stats[1])
        self.accepted += int(stats[2])
        return codes

    def sweeps(self, count: int, chunk: int = 1 << 20) -> None:
        total = count * self.sites_per_sweep
        while total > 0:
            k = min(total, chunk)
            self.steps(k)
            total -= k


def mcmc_step(state: PathSystem, w: WeightPair, rng: np.random.Generator) -> PathSystem:
    """One proposal on a copy of ``state``; the input is left untouched."""
    chain = Chain(state.cfg, w, 0, state=state)
    chain.rng = rng
    chain.steps(1)
    return chain.state


def run_chain(cfg: StartConfig, w: WeightPair, sweeps: int, burn_in: int = 0, seed: int = 0,
              thin: int = 1, start: str = "min_area", backend: str = "auto") -> Iterator[PathSystem]:
    """Snapshots after every ``thin`` sweeps once ``burn_in`` of the ``sweeps`` sweeps are done."""
    if not sweeps > burn_in >= 0:
        raise ValueError("need sweeps > burn_in >= 0")
    if thin < 1:
        raise ValueError("thin must be >= 1")
    chain = Chain(cfg, w, seed, start, backend)
    chain.sweeps(burn_in)
    done = burn_in
    while done + thin <= sweeps:
        chain.sweeps(thin)
        done += thin
        yield chain.state.copy()


@dataclass
class Heatmap:
    bins: tuple[int, int]
    mu: float
    vertices: np.ndarray
    up: np.ndarray
    left: np.ndarray
    diag: np.ndarray
    samples: int

    def fractions(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        tot = np.maximum(self.vertices * max(self.samples, 1), 1)
        return self.up / tot, self.left / tot, self.diag / tot

    def to_csv(self) -> str:
        bx, by = self.bins
        up, left, diag = self.fractions()
        lines = ["x_lo,x_hi,y_lo,y_hi,up,left,diag,samples"]
        for j in range(by):
            for k in range(bx):
                lines.append(",".join([
                    _fmt(self.mu * k / bx), _fmt(self.mu * (k + 1) / bx), _fmt(j / by), _fmt((j + 1) / by),
                    _fmt(up[k, j]), _fmt(left[k, j]), _fmt(diag[k, j]), str(self.samples)]))
        return "\n".join(lines) + "\n"


def _fmt(v: float) -> str:
    return format(float(v), ".10g")


def vertex_counts(snapshots, cfg: StartConfig) -> tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    shape = (cfg.m + 1, cfg.n + 1)
    up, left, diag = (np.zeros(shape, dtype=np.int64) for _ in range(3))
    starts = np.array(cfg.starts, dtype=np.int64)
    count = 0
    for ps in snapshots:
        _kernels.accumulate_vertices(ps.H, ps.D, starts, up, left, diag)
        count += 1
    return up, left, diag, count


def bin_counts(cfg: StartConfig, bins: tuple[int, int], up, left, diag, samples: int) -> Heatmap:
    bx, by = bins
    m, n = cfg.m, cfg.n
    xb = np.minimum(np.arange(m + 1) * bx // max(m, 1), bx - 1)
    yb = np.minimum(np.arange(n + 1) * by // max(n, 1), by - 1)
    X, Y = np.meshgrid(xb, yb, indexing="ij")

    def binned(arr):
        out = np.zeros((bx, by), dtype=np.int64)
        np.add.at(out, (X, Y), arr)
        return out

    # column 0 holds only the path endpoints (0, i); it carries no steps
    ones = np.ones((m + 1, n + 1), dtype=np.int64)
    ones[0, :] = 0
    verts = binned(ones)
    return Heatmap((bx, by), m / n if n else 0.0, verts, binned(up), binned(left), binned(diag), samples)


def density_heatmap(snapshots, cfg: StartConfig, bins: tuple[int, int] = (16, 16)) -> Heatmap:
    up, left, diag, count = vertex_counts(snapshots, cfg)
    if count == 0:
        raise ValueError("empty snapshot stream")
    return bin_counts(cfg, bins, up, left, diag, count)


def _chain_counts(args):
    cfg, w, sweeps, burn_in, seed, thin, start, backend = args
    if sweeps == 0:
        snaps = [extremal_config(cfg, start)]
    else:
        snaps = run_chain(cfg, w, burn_in + sweeps, burn_in, seed, thin, start, backend)
    return vertex_counts(snaps, cfg)


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def sample_heatmap(cfg: StartConfig, w: WeightPair, sweeps: int, burn_in: int = 0, seed: int = 0,
                   bins: tuple[int, int] = (16, 16), thin: int = 1, start: str = "min_area",
                   chains: int = 1, workers: Optional[int] = None, backend: str = "auto") -> Heatmap:
    """Heatmap pooled over independent chains; ``sweeps`` counts post-burn-in sweeps."""
    seeds = [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(chains)] \
        if chains > 1 else [seed]
    jobs = [(cfg, w, sweeps, burn_in, s, thin, start, backend) for s in seeds]
    workers = default_workers() if workers is None else workers
    if workers > 1 and chains > 1:
        with ProcessPoolExecutor(max_workers=min(workers, chains)) as ex:
            results = list(ex.map(_chain_counts, jobs))
    else:
        results = [_chain_counts(j) for j in jobs]
    up = sum(r[0] for r in results)
    left = sum(r[1] for r in results)
    diag = sum(r[2] for r in results)
    samples = sum(r[3] for r in results)
    return bin_counts(cfg, bins, up, left, diag, samples)


def small_configs(max_m: int = 7, max_states: int = 200) -> list[StartConfig]:
    """Every start configuration with m <= max_m and at most max_states systems."""
    from itertools import combinations

    out = []
    for m in range(1, max_m + 1):
        for r in range(m):
            for mid in combinations(range(1, m), r):
                cfg = StartConfig((0,) + mid + (m,))
                try:
                    for _ in _enumerate_states(cfg, max_states):
                        pass
                except SizeLimitError:
                    continue
                out.append(cfg)
    return out


@dataclass
class StationarityResult:
    cfg: StartConfig
    states: int
    samples: int
    pvalue: float
    missing: int


def integrated_autocorr(series: np.ndarray, c: float = 5.0) -> float:
    """Integrated autocorrelation time with automatic windowing."""
    x = np.asarray(series, dtype=float)
    x = x - x.mean()
    if not x.any():
        return 1.0
    size = 1 << int(np.ceil(np.log2(2 * len(x))))
    f = np.fft.rfft(x, size)
    acf = np.fft.irfft(f * np.conj(f), size)[: len(x)]
    acf /= acf[0]
    tau = 1.0
    for lag in range(1, len(x)):
        tau += 2 * acf[lag]
        if lag >= c * tau:
            break
    return max(tau, 1.0)


def stationarity_test(cfg: StartConfig, w: WeightPair, seed: int = 0, steps_per_state: int = 10 ** 5,
                      min_samples: int = 2000, pilot_sweeps: int = 4000,
                      backend: str = "auto") -> StationarityResult:
    """Chi-square of thinned chain visits against exact enumeration weights.

    The thinning stride is three integrated autocorrelation times of the area,
    measured on a pilot run.  Bins with expected count below 5 are pooled;
    ``missing`` counts enumerated states the chain never visited.
    """
    from scipy.stats import chisquare

    systems = list(enumerate_systems(cfg))
    index = {state_code(ps): k for k, ps in enumerate(systems)}
    weights = np.array([float(ps.weight(w)) for ps in systems])
    areas = np.array([ps.area for ps in systems])
    chain = Chain(cfg, w, seed, backend=backend)
    sweep = chain.sites_per_sweep
    pilot = chain.steps(pilot_sweeps * sweep, record_every=sweep)
    tau = integrated_autocorr(areas[[index[c] for c in pilot]])
    every = int(np.ceil(3 * tau)) * sweep
    total = max(steps_per_state * len(systems), min_samples * every)
    total -= total % every
    codes = chain.steps(total, record_every=every)
    counts = np.bincount([index[c] for c in codes], minlength=len(systems)).astype(float)
    expected = weights / weights.sum() * counts.sum()
    missing = int(np.sum((counts == 0) & (expected >= 10)))
    small = expected < 5
    obs = np.append(counts[~small], counts[small].sum())
    exp = np.append(expected[~small], expected[small].sum())
    if exp[-1] == 0:
        obs, exp = obs[:-1], exp[:-1]
    p = 1.0 if len(obs) < 2 else float(chisquare(obs, exp).pvalue)
    return StationarityResult(cfg, len(systems), int(counts.sum()), p, missing)


def neighbors(ps: PathSystem) -> Iterator[PathSystem]:
    """All states one accepted-if-valid move away (interpreted mirror of the kernel rules)."""
    si, sx = sites(ps.cfg)
    n, st = ps.cfg.n, ps.cfg.starts
    H, D = ps.H, ps.D
    for i, x in zip(si, sx):
        for mv in range(6):
            if D[i, x] != _kernels.MOVE_NEED_D[mv]:
                continue
            nh = H[i, x] + _kernels.MOVE_DH[mv]
            nd = _kernels.MOVE_ND[mv]
            lo = 0 if x == st[i] else H[i, x + 1] + D[i, x + 1]
            if nh < lo or nh + nd > H[i, x - 1]:
                continue
            if i < n and nh >= H[i + 1, x + 1] + D[i + 1, x + 1]:
                continue
            if x - 1 <= st[i - 1] and H[i - 1, x - 1] >= nh + nd:
                continue
            out = ps.copy()
            out.H[i, x], out.D[i, x] = nh, nd
            out.area, out.diag = out.recompute()
            yield out


def reachable_codes(cfg: StartConfig, start: str = "min_area") -> set[int]:
    """Breadth-first closure of the move graph from an extremal state."""
    first = extremal_config(cfg, start)
    seen = {state_code(first)}
    frontier = [first]
    while frontier:
        nxt = []
        for ps in frontier:
            for q in neighbors(ps):
                c = state_code(q)
                if c not in seen:
                    seen.add(c)
                    nxt.append(q)
        frontier = nxt
    return seen
