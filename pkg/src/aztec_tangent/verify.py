"""Cross-module invariant suite behind ``aztec-tangent verify``."""
from __future__ import annotations

import math
import random
import sys
import time
from fractions import Fraction
from typing import Callable

from . import asymptotics as A
from . import exact, lgv
from . import profiles as P


def _rand_weights(rng: random.Random, count: int, allow_q1: bool = False) -> list[exact.WeightPair]:
    out = []
    while len(out) < count:
        g = Fraction(rng.randint(0, 12), rng.randint(1, 4))
        q = Fraction(rng.randint(1, 16), rng.randint(1, 8))
        if q == 1 and not allow_q1:
            continue
        out.append(exact.WeightPair(g, q))
    return out


def _rand_config(rng: random.Random, max_n: int, max_m: int) -> lgv.StartConfig:
    m = rng.randint(1, max_m)
    n = rng.randint(1, min(max_n, m))
    mid = sorted(rng.sample(range(1, m), n - 1))
    return lgv.StartConfig([0] + mid + [m])


def check_oracle(size: int = 6, count: int = 20) -> None:
    rng = random.Random(1)
    for w in _rand_weights(rng, count):
        for i in range(size + 1):
            for j in range(size + 1):
                a, b = exact.single_path_Z(i, j, w), exact.brute_force_Z(i, j, w)
                assert a == b, f"Z({i},{j}) at {w}: {a} != {b}"


def check_polynomial(size: int = 8, count: int = 6) -> None:
    rng = random.Random(2)
    for w in _rand_weights(rng, count) + [exact.WeightPair(1, 1), exact.WeightPair("2/3", 1)]:
        for j in range(size + 1):
            coeffs = exact.z_poly(j, w)
            assert len(coeffs) == j + 1 and coeffs[-1] != 0, f"degree of z_{j} at {w}"
            for i in range(size + 1):
                assert lgv.z_at(j, i, w, coeffs) == exact.single_path_Z(i, j, w), f"z_{j} at column {i}, {w}"


def check_recursion(size: int = 8) -> None:
    rng = random.Random(3)
    for w in _rand_weights(rng, 3):
        Z = lambda i, j: exact.single_path_Z(i, j, w)  # noqa: E731
        g, q = w.gamma, w.q
        for i in range(1, size + 1):
            for j in range(1, size + 1):
                rhs = Z(i - 1, j) + g * q ** (2 * i - 1) * Z(i - 1, j - 1) + q ** (2 * i) * Z(i, j - 1)
                assert Z(i, j) == rhs, f"recursion at ({i},{j}), {w}"


def check_delannoy(size: int = 10) -> None:
    w = exact.WeightPair(1, 1)
    for i in range(size + 1):
        for j in range(size + 1):
            assert exact.single_path_Z(i, j, w) == exact.delannoy(i, j), f"D({i},{j})"


def check_det_product(count: int = 50) -> None:
    rng = random.Random(4)
    ws = _rand_weights(rng, count, allow_q1=True)
    for k in range(count):
        cfg = _rand_config(rng, 5, 9)
        w = ws[k] if k % 5 else exact.WeightPair(ws[k].gamma, 1)
        d, p = lgv.partition_det(cfg, w), lgv.partition_product(cfg, w)
        assert d == p, f"{cfg.starts} at {w}: det {d} != product {p}"
        assert d > 0 or w.gamma == 0, f"non-positive partition function {cfg.starts}"


def check_triangular(count: int = 20) -> None:
    rng = random.Random(5)
    for w in _rand_weights(rng, count):
        cfg = _rand_config(rng, 5, 9)
        u = lgv.matmul(lgv.lu_inverse_L(cfg, w), lgv.build_gv_matrix(cfg, w))
        for i in range(cfg.n + 1):
            assert all(u[i][j] == 0 for j in range(i)), f"L^-1 A not upper triangular for {cfg.starts}"
            assert u[i][i] == lgv.u_diagonal(cfg, w, i), f"U diagonal {i} for {cfg.starts}"


def check_one_point(count: int = 12) -> None:
    rng = random.Random(6)
    for w in _rand_weights(rng, count, allow_q1=True):
        cfg = _rand_config(rng, 4, 7)
        assert lgv.one_point_H(cfg, 0, w) == 1, "H^(0) != 1"
        for ell in range(cfg.m + 1):
            a, b = lgv.one_point_H(cfg, ell, w), lgv.one_point_H_det(cfg, ell, w)
            assert a == b, f"H^({ell}) for {cfg.starts} at {w}: {a} != {b}"


def check_enumeration(count: int = 20) -> None:
    from . import sampler as S

    rng = random.Random(7)
    for w in _rand_weights(rng, count, allow_q1=True):
        cfg = _rand_config(rng, 3, 5)
        total = sum(S.exact_enumerate_small(cfg, w).values())
        assert total == lgv.partition_det(cfg, w), f"enumeration total for {cfg.starts}"


def check_circle() -> None:
    for c in A.arctic_curve(P.aztec_diamond(), A.AsymParams(1.0, 1.0), 200):
        r = (c.x - 0.5) ** 2 + (c.y - 0.5) ** 2 - 0.25
        assert abs(r) <= 1e-9, f"off the circle at tau={c.t}: {r}"


def check_semicircle() -> None:
    prof = P.every_second()
    for c in A.arctic_curve(prof, A.AsymParams(1.0, 1.0), 200):
        assert abs(c.x ** 2 + c.y ** 2 - 2 * c.x) <= 1e-9, f"off the semicircle at tau={c.t}"
    for g in (0.5, 1.0, 2.0):
        top = semicircle_top(g)
        want = ((3 + g) / (2 * (1 + g)), 1.0)
        assert abs(top[0] - want[0]) <= 1e-6 and abs(top[1] - want[1]) <= 1e-6, f"maximum at {top} for gamma={g}"
        ys = [c.y for c in A.arctic_curve(prof, A.AsymParams(g, 1.0), 200)]
        assert max(ys) <= 1 + 1e-9, f"curve rises above y=1 for gamma={g}"


def semicircle_top(gamma: float, tau: float = 1e4) -> tuple[float, float]:
    """Top of the every-second curve, reached as tau -> +-infinity.

    The +-tau average cancels the O(1/tau) drift; beyond ~1e5 the float
    evaluation itself loses digits, so a moderate tau is used.
    """
    p = A.AsymParams(gamma, 1.0)
    prof = P.every_second()
    pts = [A.arctic_point(prof, s * tau, p) for s in (1.0, -1.0)]
    return sum(c.x for c in pts) / 2, sum(c.y for c in pts) / 2


def check_tangency() -> None:
    az = P.aztec_diamond()
    for qq in (0.5, 2.0):
        (tp,) = A.tangency_points(az, A.AsymParams(1.0, qq))
        assert abs(tp.t - 2 * qq * qq / (1 + qq * qq)) <= 1e-10, f"Aztec tangency at qq={qq}: {tp.t}"
    for g in (0.25, 1.0, 4.0):
        (tp,) = A.tangency_points(az, A.AsymParams(g, 1.0))
        assert abs(tp.x - g / (1 + g)) <= 1e-10, f"Aztec tangency at gamma={g}: {tp.x}"
        (tp,) = A.tangency_points(P.one_gap(), A.AsymParams(g, 1.0))
        assert abs(tp.t - 1.5) <= 1e-10, f"gap tangency at gamma={g}: {tp.t}"


ENVELOPE_PROFILES = (P.every_second, P.one_minimal_run, P.one_gap, P.aztec_diamond)


def random_admissible(profile: P.BoundaryProfile, p: A.AsymParams, rng: random.Random) -> float:
    """Random t from a random admissible piece, with semi-infinite pieces compactified."""
    piece = rng.choice(A.classification(profile, p.qq).pieces)
    lo, hi = piece.lo, piece.hi
    u = rng.uniform(0.02, 0.98)
    if math.isfinite(lo) and math.isfinite(hi):
        return lo + (hi - lo) * u
    theta = u * (math.pi / 2 - 0.05)
    base = lo if math.isfinite(lo) else hi
    step = max(1.0, abs(base)) * math.tan(theta)
    return base + step if math.isfinite(lo) else base - step


def envelope_residuals(profile, t: float, p: A.AsymParams) -> tuple[float, float, float]:
    """(|F_t|, analytic |dF_t/dt|, finite-difference |dF_t/dt|), each relative to its term scale."""
    c = A.arctic_point(profile, t, p)
    X, Y = (c.x, c.y) if p.q1 else (p.qq ** (2 * c.x), p.qq ** (2 * c.y))
    line = A.tangent_line(profile, t, p)
    dline = A.tangent_line_dt(profile, t, p)
    h = 1e-6 * max(1.0, abs(t))
    fd = (A.tangent_line(profile, t + h, p)(X, Y) - A.tangent_line(profile, t - h, p)(X, Y)) / (2 * h)
    dscale = dline.scale(X, Y)
    return abs(line(X, Y)) / line.scale(X, Y), abs(dline(X, Y)) / dscale, abs(fd) / dscale


def check_envelope(count: int = 200) -> None:
    rng = random.Random(8)
    done = 0
    while done < count:
        prof = ENVELOPE_PROFILES[done % len(ENVELOPE_PROFILES)]()
        p = A.AsymParams(rng.choice([0.0, 0.5, 1.0, 2.0]), rng.choice([1.0, 0.5, 0.8, 1.5, 2.0]))
        t = random_admissible(prof, p, rng)
        try:
            r = envelope_residuals(prof, t, p)
        except A.SingularPoint:
            continue
        assert max(r) <= 1e-6, f"envelope residuals {r} for {prof.name} at t={t}, {p}"
        done += 1


def check_geodesic(count: int = 50) -> None:
    rng = random.Random(9)
    for _ in range(count):
        u, v = rng.uniform(0.2, 3.0), rng.uniform(0.2, 3.0)
        g = rng.uniform(0.0, 3.0)
        qq = rng.choice([rng.uniform(0.3, 0.95), rng.uniform(1.05, 3.0)])
        p = A.AsymParams(g, qq)
        U, V = qq ** (2 * u), qq ** (2 * v)
        assert abs(A.geodesic_y(u, v, 0.0, p) - v) <= 1e-12, "y(0) != v"
        assert abs(A.geodesic_y(u, v, u, p)) <= 1e-12, "y(u) != 0"
        for k in range(1, 20):
            x = u * k / 20
            y = A.geodesic_y(u, v, x, p)
            X, Y = qq ** (2 * x), qq ** (2 * y)
            r = A.geodesic_residual(X, Y, U, V, g)
            assert abs(r) <= 1e-9 * geodesic_scale(X, Y, U, V, g), f"residual {r} at x={x}, {p}"
            if g == 0 or k % 4 == 0:
                p0 = A.AsymParams(0.0, qq)
                Y0 = qq ** (2 * A.geodesic_y(u, v, x, p0))
                want = 1 + (V - 1) * (U - X) / (U - 1)
                assert abs(Y0 - want) <= 1e-10 * max(1.0, abs(want)), "gamma = 0 reduction"


def geodesic_scale(X, Y, U, V, g) -> float:
    """Magnitude of the largest group of terms in the algebraic geodesic equation."""
    return max(abs((U - 1) * (V - 1)) * (g * (U * V + X * X * Y * Y) + V * X * X + U * Y * Y),
               abs(X * Y) * ((U + 1) * (V + 1) * (1 + U * V + g * (U + V)) + 8 * (1 + g) * U * V),
               abs((V - 1) * (X * X + U) * Y) * (U * V + 1 + g * (V + U)),
               abs((U - 1) * (Y * Y + V) * X) * (U * V + 1 + g * (U + V)), 1e-300)


SYMMETRY_PROFILES = (P.one_minimal_run, P.one_gap)


def check_symmetry() -> None:
    for make in SYMMETRY_PROFILES:
        prof = make()
        mirror = P.reflect(prof)
        mu = float(prof.mu)
        for qq in (0.5, 1.0, 2.0):
            for g in (0.5, 1.0, 3.0):
                p = A.AsymParams(g, qq)
                q = p.mirrored()
                for c in A.arctic_curve(prof, p, 60):
                    tt = mu - c.t if p.q1 else c.t * qq ** (-2 * mu)
                    d = A.arctic_point(mirror, tt, q)
                    assert abs(mu - d.x - c.x) <= 1e-8 and abs(d.y - c.y) <= 1e-8, \
                        f"{prof.name} qq={qq} gamma={g} t={c.t}: {(c.x, c.y)} vs {(mu - d.x, d.y)}"


def check_saddle(count: int = 100) -> None:
    rng = random.Random(10)
    for prof in (P.every_second(), P.one_minimal_run(), P.one_gap()):
        for qq in (0.5, 2.0):
            p = A.AsymParams(rng.uniform(0.2, 3.0), qq)
            mu = float(prof.mu)
            for _ in range(count // 4):
                step = rng.expovariate(0.2)
                t = qq ** (2 * mu) + step if qq > 1 else qq ** (2 * mu) * rng.uniform(-5.0, 0.999)
                s = A.saddle_KFLR(prof, t, p)
                assert max(A.saddle_residuals(s, p.gamma)) <= 1e-9, f"saddle residual at t={t}"
                x = A.moment_x(prof, t, p)
                ratio = (s.F - 1) / (s.R - s.F)
                assert abs(ratio - qq * qq * p.gamma * x) <= 1e-9 * max(1.0, abs(ratio)), "(F-1)/(R-F)"
                assert saddle_in_bounds(s, mu), f"saddle bounds at t={t}: {s}"


def saddle_in_bounds(s: A.SaddleSolution, mu: float, slack: float = 1e-12) -> bool:
    q2, top = s.qq ** 2, s.qq ** (2 * mu)
    if s.qq > 1:
        return (1 - slack <= s.K <= q2 + slack and 1 - slack <= s.F <= min(s.L, s.R) + slack
                and 1 - slack <= s.L <= top + slack and s.R >= 1 - slack)
    return (q2 - slack <= s.K <= 1 + slack and max(s.L, s.R) - slack <= s.F <= 1 + slack
            and top - slack <= s.L <= 1 + slack and s.R <= 1 + slack)


def check_free_energy(n: int = 400) -> None:
    for qq in (0.5, 2.0):
        p = A.AsymParams(1.0, qq)
        s0, phi = A.free_energy_S0(1.0, 1.0, p)
        fin = A.log_single_path_Z(n, n, 1.0, qq ** (1.0 / n)) / n
        assert abs(s0 - fin) <= 0.05, f"S0={s0} vs finite {fin} at qq={qq}"
        assert 0 <= phi <= 1, "phi out of range"


def check_stationarity() -> None:
    from . import sampler as S

    gammas, qs = ["1/2", "1", "3/2", "2"], ["4/5", "1", "5/4"]
    for k, cfg in enumerate(S.small_configs()):
        w = exact.WeightPair(gammas[k % 4], qs[k % 3])
        r = S.stationarity_test(cfg, w, seed=k)
        assert r.pvalue > 0.01 and r.missing == 0, f"{cfg.starts}: p={r.pvalue}, missing={r.missing}"
        assert len(S.reachable_codes(cfg)) == r.states, f"{cfg.starts}: move graph not connected"


def check_backends() -> None:
    from . import sampler as S

    cfg = lgv.StartConfig((0, 2, 3, 5))
    w = exact.WeightPair("3/2", "4/5")
    out = []
    for be in ("auto", "python"):
        ch = S.Chain(cfg, w, seed=11, backend=be)
        ch.steps(20000)
        out.append((ch.state.H.tolist(), ch.state.D.tolist(), ch.state.area, ch.state.diag))
        assert ch.state.is_non_intersecting() and (ch.state.area, ch.state.diag) == ch.state.recompute()
    assert out[0] == out[1], "compiled and interpreted kernels disagree"


def circle_sampling_score(n: int = 64, sweeps: int = 20000, burn_in: int = 20000, seed: int = 2024,
                          bins: int = 16) -> tuple[int, int]:
    """Cells consistent with the arctic circle, out of those clearly inside/outside it."""
    import numpy as np

    from . import sampler as S

    hm = S.sample_heatmap(lgv.StartConfig.aztec(n), exact.WeightPair(1, 1), sweeps, burn_in, seed,
                          (bins, bins), thin=10)
    up, left, diag = hm.fractions()
    top = np.max(np.stack([up, left, diag, 1 - up - left - diag]), axis=0)
    good = total = 0
    for k in range(bins):
        for j in range(bins):
            r = math.hypot((k + 0.5) / bins * hm.mu - 0.5, (j + 0.5) / bins - 0.5)
            if r > 0.56:
                total += 1
                good += bool(top[k, j] >= 0.95)
            elif r < 0.44:
                total += 1
                good += bool(top[k, j] < 0.95)
    return good, total


def check_circle_sampling() -> None:
    good, total = circle_sampling_score()
    assert good >= 0.9 * total, f"only {good}/{total} cells consistent"


CHECKS: list[tuple[str, Callable[[], None], bool]] = [
    ("oracle equivalence", lambda: check_oracle(4, 4), True),
    ("polynomial evaluation identity", lambda: check_polynomial(6, 3), True),
    ("recursion identity", lambda: check_recursion(6), True),
    ("Delannoy specialization", lambda: check_delannoy(8), True),
    ("determinant equals product", lambda: check_det_product(15), True),
    ("upper triangularity", lambda: check_triangular(6), True),
    ("one-point determinant ratio", lambda: check_one_point(4), True),
    ("enumeration equals determinant", lambda: check_enumeration(6), True),
    ("arctic circle fixture", check_circle, True),
    ("semicircle fixture", check_semicircle, True),
    ("tangency points", check_tangency, True),
    ("envelope property", lambda: check_envelope(60), True),
    ("geodesic residual", lambda: check_geodesic(20), True),
    ("left-right symmetry", check_symmetry, True),
    ("saddle equations", lambda: check_saddle(40), True),
    ("oracle equivalence (full)", check_oracle, False),
    ("polynomial evaluation identity (full)", check_polynomial, False),
    ("determinant equals product (full)", check_det_product, False),
    ("one-point determinant ratio (full)", check_one_point, False),
    ("enumeration equals determinant (full)", check_enumeration, False),
    ("envelope property (full)", check_envelope, False),
    ("geodesic residual (full)", check_geodesic, False),
    ("saddle equations (full)", check_saddle, False),
    ("free energy convergence", check_free_energy, False),
    ("sampler backend agreement", check_backends, False),
    ("sampler stationarity", check_stationarity, False),
    ("arctic circle sampling", check_circle_sampling, False),
]


def run(quick: bool = False, out=None) -> int:
    out = sys.stdout if out is None else out
    for name, fn, in_quick in CHECKS:
        if quick and not in_quick:
            continue
        start = time.perf_counter()
        try:
            fn()
        except Exception as exc:  # report the first failing invariant by name
            print(f"FAIL {name}: {exc}", file=out)
            return 1
        print(f"ok   {name} ({time.perf_counter() - start:.2f}s)", file=out)
    print("all checks passed", file=out)
    return 0
