"""Exact q-combinatorics of weighted Schroeder paths.

A Schroeder path here runs from ``(i, 0)`` to ``(0, j)`` with Up ``(0,1)``,
Left ``(-1,0)`` and Diag ``(-1,1)`` steps.  It carries the weight
``gamma**k * q**area`` where ``k`` is the number of diagonal steps and
``area`` counts unit triangles to the left of the path.

All values are :class:`fractions.Fraction`; ``gamma`` and ``q`` are rationals.
"""
from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import Sequence, Union

Number = Union[int, Fraction, str]

BRUTE_FORCE_LIMIT = 24


class DegenerateQError(ZeroDivisionError):
    """Raised when a q-dependent denominator vanishes."""


class SizeLimitError(ValueError):
    """Raised when an exhaustive enumeration would exceed its guard."""


def as_fraction(value: Number) -> Fraction:
    """Parse ints, Fractions, and strings such as ``"2/3"`` or ``"0.25"``."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("floats are not accepted for exact parameters; pass a string")
    return Fraction(value)


@dataclass(frozen=True)
class WeightPair:
    """Diagonal-step weight ``gamma`` and area weight ``q``."""

    gamma: Fraction
    q: Fraction

    def __init__(self, gamma: Number, q: Number):
        object.__setattr__(self, "gamma", as_fraction(gamma))
        object.__setattr__(self, "q", as_fraction(q))
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if self.q <= 0:
            raise ValueError("q must be > 0")

    @property
    def q_is_one(self) -> bool:
        # q**2 == 1 is where every q^2-analog collapses to its classical value
        return self.q * self.q == 1


class Step(enum.Enum):
    UP = "U"
    LEFT = "L"
    DIAG = "D"

    @property
    def delta(self) -> tuple[int, int]:
        return _STEP_DELTA[self]


_STEP_DELTA = {Step.UP: (0, 1), Step.LEFT: (-1, 0), Step.DIAG: (-1, 1)}


@dataclass(frozen=True)
class LatticePath:
    """A Schroeder path starting on the horizontal axis at column ``start``."""

    start: int
    steps: tuple[Step, ...] = ()

    def __post_init__(self):
        if self.start < 0:
            raise ValueError("start column must be >= 0")
        x = self.start
        for s in self.steps:
            x += s.delta[0]
            if x < 0:
                raise ValueError("path leaves the first quadrant")

    @classmethod
    def from_string(cls, start: int, word: str) -> "LatticePath":
        return cls(start, tuple(Step(c) for c in word))

    def vertices(self) -> list[tuple[int, int]]:
        x, y = self.start, 0
        out = [(x, y)]
        for s in self.steps:
            dx, dy = s.delta
            x, y = x + dx, y + dy
            out.append((x, y))
        return out

    @property
    def end(self) -> tuple[int, int]:
        return self.vertices()[-1]

    def __str__(self) -> str:
        return "".join(s.value for s in self.steps)


def path_area_and_diag(p: LatticePath) -> tuple[int, int]:
    """Return ``(area, diag)``: triangles to the left of ``p`` and its Diag count."""
    pts = p.vertices()
    area = sum((x0 + x1) * (y1 - y0) for (x0, y0), (x1, y1) in zip(pts, pts[1:]))
    diag = sum(1 for s in p.steps if s is Step.DIAG)
    return area, diag


def _qfactor_product(q2: Fraction, count: int, shift: int = 0) -> Fraction:
    out = Fraction(1)
    for s in range(1, count + 1):
        out *= q2 ** (s + shift) - 1
    return out


def q_trinomial(a: int, b: int, c: int, q: Number) -> Fraction:
    """The q^2-trinomial ``[a+b+c; a, b, c]`` evaluated at ``q``.

    At ``q**2 == 1`` the classical multinomial is returned.
    """
    if min(a, b, c) < 0:
        raise ValueError("trinomial arguments must be >= 0")
    q = as_fraction(q)
    if q == 0:
        raise DegenerateQError("q = 0 is not supported")
    q2 = q * q
    if q2 == 1:
        return Fraction(factorial(a + b + c), factorial(a) * factorial(b) * factorial(c))
    num = _qfactor_product(q2, a + b + c)
    den = _qfactor_product(q2, a) * _qfactor_product(q2, b) * _qfactor_product(q2, c)
    if den == 0:
        raise DegenerateQError(f"q = {q} makes a trinomial denominator vanish")
    return num / den


def single_path_Z(i: int, j: int, w: WeightPair) -> Fraction:
    """Partition function of weighted paths ``(i,0) -> (0,j)`` by the trinomial sum."""
    if i < 0 or j < 0:
        raise ValueError("i and j must be >= 0")
    total = Fraction(0)
    for k in range(min(i, j) + 1):
        total += w.gamma ** k * w.q ** (k * k) * q_trinomial(j - k, k, i - k, w.q)
    return total


def z_poly(j: int, w: WeightPair) -> tuple[Fraction, ...]:
    """Dense coefficients (constant first) of the degree-``j`` polynomial ``z_j``.

    For generic ``q`` the variable is ``t = q**(2*i)``.  At ``q**2 == 1`` the
    variable ``t`` is identically 1, so the polynomial is returned in the
    column index ``i`` instead: ``Z(i, j) = sum_k gamma^k C(j,k) C(i+j-k, j)``.
    """
    if j < 0:
        raise ValueError("j must be >= 0")
    g, q = w.gamma, w.q
    q2 = q * q
    coeffs = [Fraction(0)] * (j + 1)
    if q2 == 1:
        # C(i+j-k, j) = prod_{s=1..j} (i - k + s) / j!
        for k in range(j + 1):
            poly = [Fraction(1)]
            for s in range(1, j + 1):
                poly = _mul_linear(poly, Fraction(s - k), Fraction(1))
            scale = g ** k * comb(j, k) / Fraction(factorial(j))
            for d, c in enumerate(poly):
                coeffs[d] += scale * c
        return tuple(coeffs)

    den_all = _qfactor_product(q2, j)
    if den_all == 0:
        raise DegenerateQError(f"q = {q} is a root of unity of small order")
    for k in range(j + 1):
        # gamma^k q^{k^2} [j;k]_{q^2} prod_s (t q^{2(s-k)} - 1) / (q^{2s} - 1)
        scale = g ** k * q ** (k * k) * q_trinomial(k, j - k, 0, q) / den_all
        poly = [Fraction(1)]
        for s in range(1, j + 1):
            poly = _mul_linear(poly, Fraction(-1), q2 ** (s - k))
        for d, c in enumerate(poly):
            coeffs[d] += scale * c
    return tuple(coeffs)


def _mul_linear(poly: list[Fraction], c0: Fraction, c1: Fraction) -> list[Fraction]:
    """Multiply ``poly`` by ``c0 + c1*t``."""
    out = [Fraction(0)] * (len(poly) + 1)
    for d, c in enumerate(poly):
        out[d] += c * c0
        out[d + 1] += c * c1
    return out


def poly_eval(coeffs: Sequence[Fraction], t: Number) -> Fraction:
    t = as_fraction(t)
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * t + c
    return acc


def z_eval(j: int, t: Number, w: WeightPair) -> Fraction:
    return poly_eval(z_poly(j, w), t)


@lru_cache(maxsize=None)
def _path_monomials(i: int, j: int) -> tuple[tuple[tuple[int, int], int], ...]:
    """Multiset of (diag, area) over all paths (i,0)->(0,j), by depth-first walk."""
    counts: Counter = Counter()

    # local edge weights: vertical at column x -> 2x triangles, diagonal -> 2x-1
    def walk(x: int, y: int, area: int, diag: int) -> None:
        if x == 0:
            counts[(diag, area)] += 1  # only Up steps remain; they add no area
            return
        if y == j:
            counts[(diag, area)] += 1  # only Left steps remain
            return
        walk(x - 1, y, area, diag)
        walk(x - 1, y + 1, area + 2 * x - 1, diag + 1)
        walk(x, y + 1, area + 2 * x, diag)

    walk(i, 0, 0, 0)
    return tuple(sorted(counts.items()))


def brute_force_Z(i: int, j: int, w: WeightPair) -> Fraction:
    """Enumerate every Schroeder path ``(i,0) -> (0,j)`` and sum its weight."""
    if i < 0 or j < 0:
        raise ValueError("i and j must be >= 0")
    if i + j > BRUTE_FORCE_LIMIT:
        raise SizeLimitError(f"i + j = {i + j} exceeds the enumeration guard {BRUTE_FORCE_LIMIT}")
    total = Fraction(0)
    for (diag, area), n in _path_monomials(i, j):
        total += n * w.gamma ** diag * w.q ** area
    return total


def enumerate_paths(i: int, j: int) -> list[LatticePath]:
    """All Schroeder paths ``(i,0) -> (0,j)`` as explicit step sequences."""
    if i + j > BRUTE_FORCE_LIMIT:
        raise SizeLimitError("enumeration guard exceeded")
    out: list[LatticePath] = []

    def walk(x: int, y: int, steps: list[Step]) -> None:
        if x == 0 and y == j:
            out.append(LatticePath(i, tuple(steps)))
            return
        if x > 0:
            walk(x - 1, y, steps + [Step.LEFT])
        if x > 0 and y < j:
            walk(x - 1, y + 1, steps + [Step.DIAG])
        if y < j:
            walk(x, y + 1, steps + [Step.UP])

    walk(i, 0, [])
    return out


def delannoy(i: int, j: int) -> int:
    """Delannoy number by the additive recurrence ``D(i,j)=D(i-1,j)+D(i-1,j-1)+D(i,j-1)``."""
    table = [[1] * (j + 1) for _ in range(i + 1)]
    for a in range(1, i + 1):
        for b in range(1, j + 1):
            table[a][b] = table[a - 1][b] + table[a - 1][b - 1] + table[a][b - 1]
    return table[i][j]
