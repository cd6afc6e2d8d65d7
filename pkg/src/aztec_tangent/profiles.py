"""Piecewise-linear boundary profiles alpha(sigma) and their admissible t-domains."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional

from .exact import as_fraction
from .lgv import StartConfig

GENERIC = "generic"
GAP = "gap"
MINIMAL_SLOPE = "minimal-slope"


@dataclass(frozen=True)
class Segment:
    sigma_lo: Fraction
    sigma_hi: Fraction
    alpha_lo: Fraction
    slope: Fraction

    def __init__(self, sigma_lo, sigma_hi, alpha_lo, slope):
        for name, v in zip(("sigma_lo", "sigma_hi", "alpha_lo", "slope"),
                           (sigma_lo, sigma_hi, alpha_lo, slope)):
            object.__setattr__(self, name, as_fraction(v))

    @property
    def alpha_hi(self) -> Fraction:
        return self.alpha_lo + self.slope * (self.sigma_hi - self.sigma_lo)

    @property
    def minimal(self) -> bool:
        return self.slope == 1

    def alpha(self, sigma: Fraction) -> Fraction:
        return self.alpha_lo + self.slope * (sigma - self.sigma_lo)


@dataclass(frozen=True)
class BoundaryProfile:
    segments: tuple[Segment, ...]
    name: str = ""

    def __init__(self, segments: Iterable[Segment], name: str = ""):
        object.__setattr__(self, "segments", tuple(segments))
        object.__setattr__(self, "name", name)

    @property
    def mu(self) -> Fraction:
        return self.segments[-1].alpha_hi

    def alpha(self, sigma) -> Fraction:
        """alpha at sigma; at a gap the left limit is used."""
        sigma = as_fraction(sigma)
        for seg in self.segments:
            if seg.sigma_lo <= sigma <= seg.sigma_hi:
                return seg.alpha(sigma)
        raise ValueError(f"sigma={sigma} outside [0, 1]")

    def gaps(self) -> list[tuple[Fraction, Fraction, Fraction]]:
        """(sigma_p, alpha(sigma_p-), alpha(sigma_p+)) for each discontinuity."""
        return [(a.sigma_hi, a.alpha_hi, b.alpha_lo)
                for a, b in zip(self.segments, self.segments[1:]) if b.alpha_lo > a.alpha_hi]

    def minimal_runs(self) -> list[tuple[Segment, ...]]:
        """Maximal runs of consecutive slope-1 segments with no gap inside."""
        runs: list[list[Segment]] = []
        prev: Optional[Segment] = None
        for seg in self.segments:
            if seg.minimal:
                if runs and prev is not None and prev.minimal and prev.alpha_hi == seg.alpha_lo:
                    runs[-1].append(seg)
                else:
                    runs.append([seg])
            prev = seg
        return [tuple(r) for r in runs]

    def to_dict(self) -> dict:
        d: dict = {"segments": [{"sigma_lo": str(s.sigma_lo), "sigma_hi": str(s.sigma_hi),
                                 "alpha_lo": str(s.alpha_lo), "slope": str(s.slope)}
                                for s in self.segments]}
        if self.name:
            d["name"] = self.name
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "BoundaryProfile":
        if not isinstance(d, dict) or "segments" not in d:
            raise ValueError("profile record needs a 'segments' field")
        segs = []
        for rec in d["segments"]:
            try:
                segs.append(Segment(str(rec["sigma_lo"]), str(rec["sigma_hi"]),
                                    str(rec["alpha_lo"]), str(rec["slope"])))
            except KeyError as exc:
                raise ValueError(f"segment missing field {exc}") from None
        return cls(segs, str(d.get("name", "")))


def linear(pieces: Iterable[tuple], name: str = "") -> BoundaryProfile:
    """Build from ``(sigma_lo, sigma_hi, alpha_lo, slope)`` tuples."""
    return BoundaryProfile([Segment(*p) for p in pieces], name)


def load_profile(path: str | Path) -> BoundaryProfile:
    with open(path, encoding="utf-8") as fh:
        return BoundaryProfile.from_dict(json.load(fh))


def dump_profile(profile: BoundaryProfile) -> str:
    return json.dumps(profile.to_dict(), indent=2) + "\n"


def save_profile(profile: BoundaryProfile, path: str | Path) -> None:
    Path(path).write_text(dump_profile(profile), encoding="utf-8")


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.valid


def validate(profile: BoundaryProfile) -> ValidationReport:
    rep = ValidationReport()
    segs = profile.segments
    if not segs:
        rep.violations.append("no segments")
        return rep
    if segs[0].sigma_lo != 0:
        rep.violations.append("segments must start at sigma = 0")
    if segs[-1].sigma_hi != 1:
        rep.violations.append("segments must end at sigma = 1")
    if segs[0].alpha_lo != 0:
        rep.violations.append("alpha(0) must be 0")
    for k, s in enumerate(segs):
        if s.sigma_hi <= s.sigma_lo:
            rep.violations.append(f"segment {k}: empty sigma interval")
        if s.slope < 1:
            rep.violations.append(f"segment {k}: slope < 1")
    for k, (a, b) in enumerate(zip(segs, segs[1:])):
        if b.sigma_lo != a.sigma_hi:
            rep.violations.append(f"segments {k},{k + 1}: sigma intervals do not meet")
        if b.alpha_lo < a.alpha_hi:
            rep.violations.append(f"segments {k},{k + 1}: alpha decreases")
    if rep.valid:
        for run in profile.minimal_runs():
            if run[0].sigma_lo == 0 or run[-1].sigma_hi == 1:
                rep.warnings.append(
                    f"minimal-slope run on [{run[0].sigma_lo}, {run[-1].sigma_hi}] touches the boundary")
    return rep


class CollisionError(ValueError):
    pass


def discretize(profile: BoundaryProfile, n: int) -> StartConfig:
    """Start points ``a_k = floor(n * alpha(k/n))``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rep = validate(profile)
    if not rep.valid:
        raise ValueError("invalid profile: " + rep.violations[0])
    a = [math.floor(n * profile.alpha(Fraction(k, n))) for k in range(n + 1)]
    if any(y <= x for x, y in zip(a, a[1:])):
        raise CollisionError(f"floor map is not injective at n={n}: {a}")
    return StartConfig(a)


def reflect(profile: BoundaryProfile) -> BoundaryProfile:
    """``alpha~(sigma) = mu - alpha(1 - sigma)``."""
    mu = profile.mu
    segs = [Segment(1 - s.sigma_hi, 1 - s.sigma_lo, mu - s.alpha_hi, s.slope)
            for s in reversed(profile.segments)]
    return BoundaryProfile(segs, (profile.name + "-reflected") if profile.name else "")


@dataclass(frozen=True)
class TInterval:
    """One admissible stretch of the parameter t (tau in the q=1 mode)."""

    kind: str
    lo: float
    hi: float
    tag: str = ""


@dataclass(frozen=True)
class Classification:
    pieces: tuple[TInterval, ...]

    @property
    def tags(self) -> list[str]:
        out: list[str] = []
        for p in self.pieces:
            if p.tag not in out:
                out.append(p.tag)
        return out

    def by_kind(self, kind: str) -> list[TInterval]:
        return [p for p in self.pieces if p.kind == kind]

    def contains(self, t: float) -> bool:
        return any(p.lo <= t <= p.hi for p in self.pieces)


def classify(profile: BoundaryProfile, qq: Optional[float]) -> Classification:
    """Admissible t-domain; ``qq=None`` (or 1) selects the q=1 mode in tau."""
    q1 = qq is None or qq == 1
    if not q1 and qq <= 0:
        raise ValueError("qq must be > 0")

    def node(alpha: Fraction) -> float:
        return float(alpha) if q1 else float(qq) ** (2 * float(alpha))

    def span(a_lo: Fraction, a_hi: Fraction) -> tuple[float, float]:
        u, v = node(a_lo), node(a_hi)
        return (u, v) if u <= v else (v, u)

    inf = math.inf
    mu = profile.mu
    if q1 or qq > 1:
        generic = [(-inf, node(Fraction(0))), (node(mu), inf)]
    else:
        generic = [(-inf, node(mu)), (node(Fraction(0)), inf)]
    raw: list[tuple[str, float, float]] = [(GENERIC, lo, hi) for lo, hi in generic]
    for _, a_minus, a_plus in profile.gaps():
        raw.append((GAP, *span(a_minus, a_plus)))
    for run in profile.minimal_runs():
        raw.append((MINIMAL_SLOPE, *span(run[0].alpha_lo, run[-1].alpha_hi)))
    raw.sort(key=lambda r: (r[1], r[2]))

    # touching pieces share a tag
    pieces: list[TInterval] = []
    counters: dict[str, int] = {}
    group: list[tuple[str, float, float]] = []

    def flush():
        if not group:
            return
        names = []
        for kind, _, _ in group:
            counters[kind] = counters.get(kind, 0) + 1
            names.append(f"{kind}{counters[kind]}")
        tag = "+".join(names)
        pieces.extend(TInterval(kind, lo, hi, tag) for kind, lo, hi in group)
        group.clear()

    for r in raw:
        if group and r[1] > group[-1][2]:
            flush()
        group.append(r)
    flush()
    return Classification(tuple(pieces))


# regression fixtures
def aztec_diamond() -> BoundaryProfile:
    return linear([(0, 1, 0, 1)], "aztec-diamond")


def every_second() -> BoundaryProfile:
    return linear([(0, 1, 0, 2)], "every-second")


def one_minimal_run() -> BoundaryProfile:
    return linear([(0, "1/3", 0, 2), ("1/3", "2/3", "2/3", 1), ("2/3", 1, 1, 2)], "one-minimal-run")


def one_gap() -> BoundaryProfile:
    return linear([(0, "1/2", 0, 2), ("1/2", 1, 2, 2)], "one-gap")


def two_minimal_runs() -> BoundaryProfile:
    return linear([(0, "2/5", 0, 1), ("2/5", "3/5", "2/5", 2), ("3/5", 1, "4/5", 1)], "two-minimal-runs")


def fully_frozen() -> BoundaryProfile:
    return linear([(0, "1/2", 0, 1), ("1/2", 1, 1, 1)], "fully-frozen")


BUILTINS = {
    "aztec": aztec_diamond,
    "every-second": every_second,
    "one-minimal-run": one_minimal_run,
    "one-gap": one_gap,
    "two-minimal-runs": two_minimal_runs,
    "fully-frozen": fully_frozen,
}
