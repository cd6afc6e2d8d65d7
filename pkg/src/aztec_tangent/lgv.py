"""Finite-size partition functions of non-intersecting Schroeder path systems.

Path ``i`` runs from ``(a_i, 0)`` to ``(0, i)``.  The partition function is the
determinant of ``A[i][j] = Z(a_i -> j)`` and also has a closed product form.
At ``q == 1`` every ``q**(2a)`` node collapses to 1; the Vandermonde-type
ratios are then taken in the limit, i.e. with the node ``a`` itself.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from . import exact
from .exact import DegenerateQError, WeightPair

Matrix = list[list[Fraction]]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class StartConfig:
    starts: tuple[int, ...]

    def __init__(self, starts: Iterable[int]):
        s = tuple(int(v) for v in starts)
        if not s:
            raise ConfigError("need at least one start point")
        if s[0] != 0:
            raise ConfigError("a_0 must be 0")
        if any(b <= a for a, b in zip(s, s[1:])):
            raise ConfigError("start points must be strictly increasing")
        object.__setattr__(self, "starts", s)

    @property
    def n(self) -> int:
        return len(self.starts) - 1

    @property
    def m(self) -> int:
        return self.starts[-1]

    @property
    def defects(self) -> tuple[int, ...]:
        taken = set(self.starts)
        return tuple(b for b in range(self.m + 1) if b not in taken)

    @classmethod
    def from_defects(cls, defects: Iterable[int], n: int, m: int) -> "StartConfig":
        d = sorted(set(int(v) for v in defects))
        if len(d) != m - n:
            raise ConfigError(f"expected {m - n} defects for n={n}, m={m}, got {len(d)}")
        if any(b <= 0 or b >= m for b in d):
            raise ConfigError("defects must lie strictly between 0 and m")
        return cls(b for b in range(m + 1) if b not in d)

    @classmethod
    def aztec(cls, n: int) -> "StartConfig":
        return cls(range(n + 1))


def _node(a: int, w: WeightPair) -> Fraction:
    # interpolation node q^{2a}; at q^2 = 1 the limiting ratios use a itself
    return Fraction(a) if w.q_is_one else w.q ** (2 * a)


def z_at(j: int, i: int, w: WeightPair, coeffs: Sequence[Fraction] | None = None) -> Fraction:
    """Evaluate ``z_j`` at the point corresponding to column ``i``."""
    if coeffs is None:
        coeffs = exact.z_poly(j, w)
    return exact.poly_eval(coeffs, _node(i, w))


def build_gv_matrix(cfg: StartConfig, w: WeightPair) -> Matrix:
    n = cfg.n
    return [[exact.single_path_Z(a, j, w) for j in range(n + 1)] for a in cfg.starts]


def det(mat: Matrix) -> Fraction:
    """Determinant by rational Gaussian elimination, pivoting on the first nonzero entry."""
    a = [row[:] for row in mat]
    size = len(a)
    sign = 1
    out = Fraction(1)
    for col in range(size):
        piv = next((r for r in range(col, size) if a[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            sign = -sign
        p = a[col][col]
        out *= p
        for r in range(col + 1, size):
            f = a[r][col] / p
            if f:
                row, prow = a[r], a[col]
                for c in range(col, size):
                    row[c] -= f * prow[c]
    return sign * out


def matmul(x: Matrix, y: Matrix) -> Matrix:
    return [[sum((x[i][k] * y[k][j] for k in range(len(y))), Fraction(0))
             for j in range(len(y[0]))] for i in range(len(x))]


def partition_det(cfg: StartConfig, w: WeightPair) -> Fraction:
    return det(build_gv_matrix(cfg, w))


def partition_product(cfg: StartConfig, w: WeightPair) -> Fraction:
    n, g, q = cfg.n, w.gamma, w.q
    out = q ** (n * (n + 1) * (2 * n + 1) // 6)
    for s in range(n):
        out *= (g + q ** (2 * s + 1)) ** (n - s)
    num = Fraction(1)
    den = Fraction(1)
    for i in range(n + 1):
        for j in range(i):
            num *= _node(cfg.starts[i], w) - _node(cfg.starts[j], w)
            den *= _node(i, w) - _node(j, w)
    if den == 0:
        raise DegenerateQError("Vandermonde denominator vanishes")
    return out * num / den


def lu_inverse_L(cfg: StartConfig, w: WeightPair) -> Matrix:
    """Lower-triangular matrix with ``L^{-1} A`` upper triangular."""
    n = cfg.n
    x = [_node(a, w) for a in cfg.starts]
    if len(set(x)) != len(x):
        raise DegenerateQError("interpolation nodes q^{2a_i} are not distinct")
    out = [[Fraction(0)] * (n + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        top = Fraction(1)
        for s in range(i):
            top *= x[i] - x[s]
        for j in range(i + 1):
            bot = Fraction(1)
            for s in range(i + 1):
                if s != j:
                    bot *= x[j] - x[s]
            out[i][j] = top / bot
    return out


def u_diagonal(cfg: StartConfig, w: WeightPair, i: int) -> Fraction:
    """Closed form of the i-th diagonal entry of ``U = L^{-1} A``."""
    g, q = w.gamma, w.q
    out = Fraction(1)
    for s in range(i):
        out *= q ** (2 * s + 1) * (g + q ** (2 * s + 1))
        out *= (_node(cfg.starts[i], w) - _node(cfg.starts[s], w)) / (_node(i, w) - _node(s, w))
    return out


def one_point_H(cfg: StartConfig, ell: int, w: WeightPair) -> Fraction:
    """Probability weight ratio for the outermost path exiting at column ``ell``.

    Uses the finite residue sum over the start points ``a_k >= ell``.
    """
    n, starts = cfg.n, cfg.starts
    if ell < 0:
        raise ValueError("ell must be >= 0")
    if ell > cfg.m:
        return Fraction(0)
    x = [_node(a, w) for a in starts]
    if len(set(x)) != len(x):
        raise DegenerateQError("interpolation nodes q^{2a_i} are not distinct")
    coeffs = exact.z_poly(n, w)
    top = Fraction(1)
    for s in range(n):
        top *= x[n] - x[s]
    total = Fraction(0)
    for k, a in enumerate(starts):
        if a < ell:
            continue
        bot = Fraction(1)
        for s in range(n + 1):
            if s != k:
                bot *= x[k] - x[s]
        total += top / bot * z_at(n, a - ell, w, coeffs)
    return w.q ** (2 * n * ell) * total / u_diagonal(cfg, w, n)


def one_point_H_det(cfg: StartConfig, ell: int, w: WeightPair) -> Fraction:
    """Determinant-ratio oracle ``det A^(ell) / det A``."""
    a_mat = build_gv_matrix(cfg, w)
    n = cfg.n
    mod = [row[:] for row in a_mat]
    for i, a in enumerate(cfg.starts):
        mod[i][n] = w.q ** (2 * n * ell) * exact.single_path_Z(a - ell, n, w) if a >= ell else Fraction(0)
    return det(mod) / det(a_mat)


def escape_Y(ell: int, r: int, w: WeightPair) -> Fraction:
    """Weight of the escape path from ``(ell, n)`` to ``(0, n + r)`` leaving upward."""
    if ell < 0 or r < 1:
        raise ValueError("need ell >= 0 and r >= 1")
    if ell == 0:
        return Fraction(1)
    q, g = w.q, w.gamma
    coeffs = exact.z_poly(r - 1, w)
    return q ** (2 * ell) * z_at(r - 1, ell, w, coeffs) + g * q ** (2 * ell - 1) * z_at(r - 1, ell - 1, w, coeffs)
