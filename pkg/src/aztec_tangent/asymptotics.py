"""Asymptotic limit-shape engine in double precision.

``qq`` is the rescaled area weight (q = qq**(1/n)).  ``qq == 1`` is a separate
exact mode in which the parameter is ``tau`` and nodes are ``alpha`` values
instead of ``qq**(2 alpha)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from .profiles import (GAP, GENERIC, MINIMAL_SLOPE, BoundaryProfile, Classification,
                       TInterval, classify)


class SingularPoint(ArithmeticError):
    """A displayed denominator vanishes or a value leaves its real domain."""


@dataclass(frozen=True)
class AsymParams:
    gamma: float
    qq: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "qq", float(self.qq))
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if not self.qq > 0:
            raise ValueError("qq must be > 0")

    @property
    def q1(self) -> bool:
        return self.qq == 1.0

    @property
    def epsilon(self) -> int:
        return 0 if self.q1 else (1 if self.qq > 1 else -1)

    @property
    def log_qq2(self) -> float:
        return 2.0 * math.log(self.qq)

    def node(self, alpha: float) -> float:
        return float(alpha) if self.q1 else self.qq ** (2.0 * float(alpha))

    def to_log(self, value: float) -> float:
        """Map X = qq^{2x} back to x (identity in the q=1 mode)."""
        return value if self.q1 else math.log(value) / self.log_qq2

    def mirrored(self) -> "AsymParams":
        return AsymParams(math.inf if self.gamma == 0 else 1.0 / self.gamma, 1.0 / self.qq)


@dataclass(frozen=True)
class CurveSample:
    t: float
    x: float
    y: float
    interval_tag: str = ""


@lru_cache(maxsize=256)
def _seg_nodes(profile: BoundaryProfile, qq: float) -> tuple[tuple[float, float, float, bool], ...]:
    p = AsymParams(0.0, qq)
    return tuple((p.node(s.alpha_lo), p.node(s.alpha_hi), 1.0 / float(s.slope), s.minimal)
                 for s in profile.segments)


@lru_cache(maxsize=256)
def classification(profile: BoundaryProfile, qq: float) -> Classification:
    return classify(profile, None if qq == 1.0 else qq)


def moment_x(profile: BoundaryProfile, t: float, p: AsymParams) -> float:
    """Moment-generating function x(t); NaN outside the real domain, +-inf at poles."""
    pref = 1.0 if p.q1 else p.qq ** -2.0
    if math.isinf(t):
        return pref
    segs = _seg_nodes(profile, p.qq)
    sign = 1.0
    hit = False
    for a_lo, a_hi, inv_c, minimal in segs:
        lo, hi = (a_lo, a_hi) if a_lo <= a_hi else (a_hi, a_lo)
        if lo < t < hi:
            if not minimal:
                return math.nan
            sign = -sign
        if t == a_lo or t == a_hi:
            hit = True
    if hit:
        # combine exponents node by node so that touching segments cancel
        exps: dict[float, float] = {}
        for a_lo, a_hi, inv_c, _ in segs:
            exps[a_hi] = exps.get(a_hi, 0.0) + inv_c
            exps[a_lo] = exps.get(a_lo, 0.0) - inv_c
        zero = pole = False
        logmag = 0.0
        for a, e in exps.items():
            if e == 0.0:
                continue
            if t == a:
                zero, pole = zero or e > 0, pole or e < 0
            else:
                logmag += e * math.log(abs(t - a))
        if zero and pole:
            return math.nan
        if pole:
            return sign * math.inf
        if zero:
            return 0.0
        return sign * pref * math.exp(logmag)
    out = pref
    for a_lo, a_hi, inv_c, _ in segs:
        out *= abs((t - a_hi) / (t - a_lo)) ** inv_c
    return sign * out


def moment_x_deriv(profile: BoundaryProfile, t: float, p: AsymParams) -> float:
    """Logarithmic derivative form x'(t) = x(t) * sum (1/c) (A_hi - A_lo)/((t-A_hi)(t-A_lo))."""
    x = moment_x(profile, t, p)
    if not math.isfinite(x):
        return math.nan
    segs = _seg_nodes(profile, p.qq)
    if x == 0.0:
        return _deriv_at_zero(segs, t, p)
    acc = 0.0
    for a_lo, a_hi, inv_c, _ in segs:
        d = (t - a_hi) * (t - a_lo)
        if d == 0.0:
            return math.nan
        acc += inv_c * (a_hi - a_lo) / d
    return x * acc


def _deriv_at_zero(segs, t: float, p: AsymParams) -> float:
    """x'(t) at a simple zero t = A of x: the limit of x(s)/(s - A) times 1."""
    exps: dict[float, float] = {}
    for a_lo, a_hi, inv_c, _ in segs:
        exps[a_hi] = exps.get(a_hi, 0.0) + inv_c
        exps[a_lo] = exps.get(a_lo, 0.0) - inv_c
    e = exps.get(t, 0.0)
    if e > 1.0:
        return 0.0
    if e < 1.0:
        return math.nan
    mag = 1.0 if p.q1 else p.qq ** -2.0
    for a, ea in exps.items():
        if a != t and ea != 0.0:
            mag *= abs(t - a) ** ea
    # sign of x just to the right of t
    sign = 1.0
    for a_lo, a_hi, _, minimal in segs:
        lo, hi = min(a_lo, a_hi), max(a_lo, a_hi)
        if minimal and lo <= t < hi:
            sign = -sign
    return sign * mag


# --- free energy -----------------------------------------------------------------

def _I(z: float, qq: float) -> float:
    """Integral of log|qq^{2s} - 1| for s in [0, z]."""
    if z == 0.0:
        return 0.0
    lq2 = 2.0 * math.log(qq)
    val, _ = quad(lambda s: math.log(abs(math.expm1(lq2 * s))), 0.0, z, limit=200)
    return val


def saddle_F(u: float, v: float, p: AsymParams) -> float:
    U, V = p.qq ** (2 * u), p.qq ** (2 * v)
    b = U + V + (U - 1) * (V - 1) / (1 + p.gamma)
    disc = math.sqrt(max(b * b - 4 * U * V, 0.0))
    big = (b + disc) / 2
    small = U * V / big
    return small if p.qq > 1 else big


def free_energy_S0(u: float, v: float, p: AsymParams) -> tuple[float, float]:
    """Return (S0, phi): leading behaviour of log Z_{(un,0)->(0,vn)} / n."""
    if u <= 0 or v <= 0:
        raise ValueError("u and v must be > 0")
    if p.q1:
        raise ValueError("free_energy_S0 needs qq != 1")
    F = saddle_F(u, v, p)
    phi = math.log(F) / p.log_qq2
    phi = min(max(phi, 0.0), min(u, v))
    lq = math.log(p.qq)
    s0 = phi * phi * lq
    if phi > 0:
        s0 += phi * math.log(p.gamma)
    s0 += _I(u + v - phi, p.qq) - _I(v - phi, p.qq) - _I(phi, p.qq) - _I(u - phi, p.qq)
    return s0, phi


def log_single_path_Z(i: int, j: int, gamma: float, q: float) -> float:
    """Floating log of the trinomial-sum partition function, for large i, j."""
    q2 = q * q
    lq2 = math.log(q2)
    size = i + j + 1
    s = np.arange(1, size)
    cum = np.concatenate(([0.0], np.cumsum(np.log(np.abs(np.expm1(lq2 * s))))))
    k = np.arange(0, min(i, j) + 1)
    terms = cum[i + j - k] - cum[j - k] - cum[k] - cum[i - k] + k * k * math.log(q)
    if gamma == 0:
        terms = terms[:1]
    else:
        terms = terms + k * math.log(gamma)
    mx = terms.max()
    return float(mx + math.log(np.exp(terms - mx).sum()))


# --- geodesics -------------------------------------------------------------------

def geodesic_Y(X: float, U: float, V: float, gamma: float, eps: int) -> float:
    g = gamma
    delta = math.sqrt(max((U * V - 1) ** 2 + 2 * g * ((U + V) * (U * V + 1) - 4 * U * V)
                          + g * g * (U - V) ** 2, 0.0))
    num = ((X - 1) * (V - 1) * (U + g) + (U - 1) * (X + 1) * (1 + g) + (X - 1) * eps * delta)
    den = 2 * (U - 1) * ((U - X) * (1 + g * X) + V * (U + g * X) * (X - 1))
    return 1 + (V - 1) * (U - X) * num / den


def geodesic_y(u: float, v: float, x: float, p: AsymParams) -> float:
    if u <= 0 or v <= 0:
        raise ValueError("u and v must be > 0")
    if not -1e-12 <= x <= u + 1e-12:
        raise ValueError("x outside [0, u]")
    if p.q1:
        return v * (u - x) / u
    U, V, X = p.qq ** (2 * u), p.qq ** (2 * v), p.qq ** (2 * x)
    return math.log(geodesic_Y(X, U, V, p.gamma, p.epsilon)) / p.log_qq2


def geodesic_residual(X: float, Y: float, U: float, V: float, gamma: float) -> float:
    g = gamma
    return ((U - 1) * (V - 1) * (g * (U * V + X * X * Y * Y) - (V * X * X + U * Y * Y))
            - X * Y * ((U + 1) * (V + 1) * (1 + U * V + g * (U + V)) - 8 * (1 + g) * U * V)
            + (V - 1) * (X * X + U) * Y * (U * V - 1 + g * (V - U))
            + (U - 1) * (Y * Y + V) * X * (U * V - 1 + g * (U - V)))


# --- saddle point of the one-point function ---------------------------------------

@dataclass(frozen=True)
class SaddleSolution:
    t: float
    qq: float
    K: float
    F: float
    L: float
    R: float

    def _log(self, v: float) -> float:
        return math.log(v) / (2 * math.log(self.qq))

    @property
    def kappa(self) -> float:
        return self._log(self.K)

    @property
    def phi(self) -> float:
        return self._log(self.F)

    @property
    def xi(self) -> float:
        return self._log(self.L)

    @property
    def rho(self) -> float:
        return self._log(self.R) if math.isfinite(self.R) else math.inf


def saddle_KFLR(profile: BoundaryProfile, t: float, p: AsymParams) -> SaddleSolution:
    if p.q1:
        raise ValueError("saddle_KFLR needs qq != 1")
    x = moment_x(profile, t, p)
    if not math.isfinite(x) or x == 1.0:
        raise SingularPoint(f"x(t) = {x}")
    g, q2 = p.gamma, p.qq ** 2
    K = (1 + g * q2 * x) / (1 + g * x)
    dF = (1 + g * q2 * x) * (t * (1 + g * x) + g * (1 - x))
    F = (1 + g) * t * (1 + g * x) / dF
    L = t * (1 - q2 * x) * (1 + g * x) / ((1 - x) * (1 + g * q2 * x))
    rden = q2 * x * (t * (1 + g * x) + g * (1 - x))
    rnum = t * (1 + g * x) - (1 - x)
    R = math.copysign(math.inf, rnum) if rden == 0 else rnum / rden
    return SaddleSolution(t, p.qq, K, F, L, R)


def saddle_residuals(sol: SaddleSolution, gamma: float) -> tuple[float, float, float, float]:
    """Residuals of the four saddle-point equations, each relative to its term scale."""
    K, F, L, R, t, g = sol.K, sol.F, sol.L, sol.R, sol.t, gamma
    q2 = sol.qq ** 2
    x = (K - 1) / (g * (q2 - K)) if g else math.nan

    def rel(a: float, b: float) -> float:
        return abs(a - b) / max(abs(a), abs(b), 1e-300)

    r1 = rel(g * (L - F) * (R - F), (F - 1) * (L * R - F))
    r2 = rel(g * (q2 - K) * (K * L - t), (K - 1) * (K * L - q2 * t))
    r3 = rel((K * L - q2 * t) * x, K * L - t) if g else 0.0
    r4 = rel(q2 * (L * R - F) * (K * L - t), (L - F) * (K * L - q2 * t))
    return r1, r2, r3, r4


# --- tangent family and arctic curve ---------------------------------------------

@dataclass(frozen=True)
class TangentLine:
    """Coefficients of c_XY*X*Y + c_Y*Y + c_X*X + c_0 (x, y coordinates in the q=1 mode)."""

    c_XY: float
    c_Y: float
    c_X: float
    c_0: float

    def __call__(self, X: float, Y: float) -> float:
        return self.c_XY * X * Y + self.c_Y * Y + self.c_X * X + self.c_0

    def scale(self, X: float, Y: float) -> float:
        return abs(self.c_XY * X * Y) + abs(self.c_Y * Y) + abs(self.c_X * X) + abs(self.c_0)

    def solve_Y(self, X: float) -> float:
        return -(self.c_X * X + self.c_0) / (self.c_XY * X + self.c_Y)


def _x_checked(profile, t, p) -> float:
    x = moment_x(profile, t, p)
    if not math.isfinite(x):
        raise SingularPoint(f"x(t) undefined at t={t}")
    return x


def tangent_line(profile: BoundaryProfile, t: float, p: AsymParams) -> TangentLine:
    return tangent_from_x(_x_checked(profile, t, p), t, p)


def tangent_from_x(x: float, t: float, p: AsymParams) -> TangentLine:
    g = p.gamma
    if p.q1:
        a = (1 - x) * (1 + g * x)
        return TangentLine(0.0, (1 + g) * x, a, -t * a)
    return TangentLine(g * x * (1 - x), x * t * (1 + g * x), 1 - x, -t * (1 + g * x))


def tangent_line_dt(profile: BoundaryProfile, t: float, p: AsymParams) -> TangentLine:
    """Coefficients of the t-derivative of the tangent family, from x'(t)."""
    x = _x_checked(profile, t, p)
    xp = moment_x_deriv(profile, t, p)
    g = p.gamma
    if p.q1:
        a = (1 - x) * (1 + g * x)
        ap = -xp * (1 + g * x) + g * xp * (1 - x)
        return TangentLine(0.0, (1 + g) * xp, ap, -a - t * ap)
    return TangentLine(g * xp * (1 - 2 * x),
                       xp * t * (1 + g * x) + x * (1 + g * x) + g * x * xp * t,
                       -xp,
                       -(1 + g * x) - g * t * xp)


def tangent_by_construction(x: float, tau: float, gamma: float) -> TangentLine:
    """q=1 line through (tau, 0) orthogonal to O->Q, Q = ((1-x)(1+g x)/(1+g), x)."""
    qx, qy = (1 - x) * (1 + gamma * x) / (1 + gamma), x
    return TangentLine(0.0, qy, qx, -qx * tau)


def arctic_point(profile: BoundaryProfile, t: float, p: AsymParams, tag: str = "") -> CurveSample:
    x = _x_checked(profile, t, p)
    xp = moment_x_deriv(profile, t, p)
    if not math.isfinite(xp) or xp == 0.0:
        raise SingularPoint(f"x'(t) singular at t={t}")
    g = p.gamma
    if p.q1:
        den = (1 + g * x * x) * xp
        xc = t - x * (1 - x) * (1 + g * x) / den
        yc = (1 - x) ** 2 * (1 + g * x) ** 2 / ((1 + g) * den)
        return CurveSample(t, xc, yc, tag)
    if g == 0.0:
        den = x * (1 - x) + t * xp
        if den == 0.0:
            raise SingularPoint("vanishing denominator")
        X = t * t * xp / den
        Y = ((1 - x) + t * xp) / den
    else:
        P = g * (1 - x) ** 2 * xp
        B = (1 + g) * x * (1 - x) * (1 + g * x) + t * xp * ((1 + g * x) ** 2 - g * (1 - x) ** 2)
        C = t * t * (1 + g * x) ** 2 * xp
        w2 = B * B + 4 * g * (t * xp * (1 + g * x) * (1 - x)) ** 2
        assert w2 >= 0.0
        eps = p.epsilon
        omega = math.sqrt(w2)
        if B * eps > 0:
            X = 2 * C / (B + eps * omega)
        elif P != 0.0:
            X = (eps * omega - B) / (2 * P)
        else:
            raise SingularPoint("vanishing denominator")
        line = tangent_from_x(x, t, p)
        den = line.c_XY * X + line.c_Y
        if den == 0.0:
            raise SingularPoint("vanishing denominator")
        Y = line.solve_Y(X)
    if not (X > 0 and Y > 0 and math.isfinite(X) and math.isfinite(Y)):
        raise SingularPoint(f"non-positive X or Y at t={t}")
    return CurveSample(t, math.log(X) / p.log_qq2, math.log(Y) / p.log_qq2, tag)


def arctic_point_displayed_Y(profile: BoundaryProfile, t: float, p: AsymParams) -> float:
    """Y(t) from its own closed form (an independent check of the line solve)."""
    x = _x_checked(profile, t, p)
    xp = moment_x_deriv(profile, t, p)
    g, eps = p.gamma, p.epsilon
    w2 = (((1 + g) * x * (1 - x) * (1 + g * x) + t * xp * ((1 + g * x) ** 2 - g * (1 - x) ** 2)) ** 2
          + 4 * g * (t * xp * (1 + g * x) * (1 - x)) ** 2)
    num = eps * math.sqrt(w2) - (1 - g) * x * (1 - x) * (1 + g * x) - (1 + g) * t * xp * (1 - g * x * x)
    return num / (2 * g * x * x * ((1 - x) * (1 + g * x) + (1 + g) * t * xp))


def t_grid(piece: TInterval, count: int, theta_cap: float = 1e-3) -> np.ndarray:
    """Parameter grid on one interval; semi-infinite ends use t = end +- s*tan(theta)."""
    k = np.arange(count)
    lo, hi = piece.lo, piece.hi
    if math.isfinite(lo) and math.isfinite(hi):
        s = (k + 0.5) / count
        return lo + (hi - lo) * (1 - np.cos(np.pi * s)) / 2
    theta = (k + 1) / count * (np.pi / 2 - theta_cap)
    if math.isfinite(lo):
        return lo + max(1.0, abs(lo)) * np.tan(theta)
    if math.isfinite(hi):
        return (hi - max(1.0, abs(hi)) * np.tan(theta))[::-1]
    return np.tan(np.pi * ((k + 0.5) / count - 0.5) * (1 - 2 * theta_cap / np.pi))


def sample_arctic_curve(profile: BoundaryProfile, p: AsymParams, samples_per_interval: int = 200,
                        theta_cap: float = 1e-3) -> tuple[list[CurveSample], int]:
    """Arctic curve samples ordered by tag then t, plus the number of singular samples skipped."""
    out: list[CurveSample] = []
    skipped = 0
    cls = classification(profile, p.qq)
    for tag in cls.tags:
        ts = np.sort(np.concatenate([t_grid(pc, samples_per_interval, theta_cap)
                                     for pc in cls.pieces if pc.tag == tag]))
        for t in ts:
            try:
                out.append(arctic_point(profile, float(t), p, tag))
            except SingularPoint:
                skipped += 1
    return out, skipped


def arctic_curve(profile: BoundaryProfile, p: AsymParams, samples_per_interval: int = 200) -> list[CurveSample]:
    return sample_arctic_curve(profile, p, samples_per_interval)[0]


@dataclass(frozen=True)
class TangencyPoint:
    t: float
    x: float
    kind: str
    degenerate: bool = False


def _bisect(f, lo: float, hi: float, flo: float, fhi: float) -> float:
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise SingularPoint("root not bracketed")
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if hi - lo <= 1e-13 * max(1.0, abs(mid)) or mid in (lo, hi):
            break
        fm = f(mid)
        if math.isnan(fm):
            raise SingularPoint("NaN inside bracket")
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def tangency_points(profile: BoundaryProfile, p: AsymParams) -> list[TangencyPoint]:
    out: list[TangencyPoint] = []
    for pc in classification(profile, p.qq).pieces:
        if pc.kind == GENERIC:
            continue
        if pc.kind == MINIMAL_SLOPE and p.gamma == 0:
            # x -> -inf sits at the lower-alpha end of the run
            t = pc.lo if (p.q1 or p.qq > 1) else pc.hi
            out.append(TangencyPoint(t, p.to_log(t), pc.kind, True))
            continue
        target = 1.0 if pc.kind == GAP else -1.0 / p.gamma

        def f(s, target=target):
            return moment_x(profile, s, p) - target

        # endpoint values are zeros or poles; read their signs from just inside
        inset = 1e-12 * (pc.hi - pc.lo)
        lo, hi = pc.lo + inset, pc.hi - inset
        t = _bisect(f, lo, hi, f(lo), f(hi))
        out.append(TangencyPoint(t, p.to_log(t), pc.kind))
    return out


def is_admissible(profile: BoundaryProfile, t: float, p: AsymParams) -> bool:
    return classification(profile, p.qq).contains(t)


__all__ = [
    "AsymParams", "CurveSample", "SaddleSolution", "SingularPoint", "TangentLine", "TangencyPoint",
    "arctic_curve", "arctic_point", "free_energy_S0", "geodesic_residual", "geodesic_y",
    "moment_x", "moment_x_deriv", "saddle_KFLR", "sample_arctic_curve", "tangency_points",
    "tangent_line", "tangent_line_dt", "GAP", "GENERIC", "MINIMAL_SLOPE",
]

