"""aztec-tangent: exact weights, arctic curves, sampling and self-checks from the shell.

Exit codes: 0 success, 1 a verification invariant failed, 2 invalid input.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
import tempfile
from decimal import Decimal, localcontext
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import asymptotics as A
from . import exact, lgv, sampler, svg, verify
from . import profiles as P

SCALING_NOTE = ("The finite-size weight q and the rescaled weight qq are independent inputs. "
                "The scaling regime q = qq^(1/n) is only applied when --match-scaling N is given.")


class UsageError(ValueError):
    """Invalid command-line input; reported with exit code 2."""


# ---------------------------------------------------------------- parsing helpers

def _fraction(text: str) -> Fraction:
    try:
        return exact.as_fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not an exact number: {text!r}") from None


def _positive_float(text: str) -> float:
    try:
        v = float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return v


def _nonneg_float(text: str) -> float:
    try:
        v = float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def _int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.replace(" ", "").split(",") if tok]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text!r}") from None


def _bins(text: str) -> tuple[int, int]:
    vals = _int_list(text)
    if len(vals) == 1:
        vals = vals * 2
    if len(vals) != 2 or min(vals) < 1:
        raise argparse.ArgumentTypeError("bins must be BX,BY with positive integers")
    return vals[0], vals[1]


def _count(lo: int):
    def parse(text: str) -> int:
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
        if v < lo:
            raise argparse.ArgumentTypeError(f"must be >= {lo}")
        return v
    return parse


def read_profile_arg(source: str) -> P.BoundaryProfile:
    """``builtin:NAME`` or a path to a profile record (not yet validated)."""
    if source.startswith("builtin:"):
        name = source.split(":", 1)[1]
        if name not in P.BUILTINS:
            raise UsageError(f"unknown builtin profile {name!r}; choose from {', '.join(P.BUILTINS)}")
        return P.BUILTINS[name]()
    try:
        return P.load_profile(source)
    except OSError as exc:
        raise UsageError(f"cannot read profile: {exc}") from None
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise UsageError(f"malformed profile {source}: {exc}") from None


def load_profile_arg(source: str) -> P.BoundaryProfile:
    prof = read_profile_arg(source)
    rep = P.validate(prof)
    if not rep.valid:
        raise UsageError("invalid profile: " + "; ".join(rep.violations))
    for msg in rep.warnings:
        print(f"warning: {msg}", file=sys.stderr)
    return prof


def config_from_defects(defects: Optional[list[int]], n: Optional[int], m: Optional[int]) -> lgv.StartConfig:
    if n is None or m is None:
        raise UsageError("--n and --m are required with --defects")
    if n < 0 or m < n:
        raise UsageError("need 0 <= n <= m")
    try:
        return lgv.StartConfig.from_defects(defects or [], n, m)
    except lgv.ConfigError as exc:
        raise UsageError(str(exc)) from None


def weights(args) -> exact.WeightPair:
    try:
        return exact.WeightPair(args.gamma, args.q)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def decimal_str(v: Fraction, digits: int = 20) -> str:
    with localcontext() as ctx:
        ctx.prec = digits
        return str(Decimal(v.numerator) / Decimal(v.denominator))


def write_output(path: Optional[str], text: str) -> None:
    """Write atomically (temp file + rename); ``None`` or ``-`` means stdout."""
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent if str(target.parent) else ".", prefix=".tmp-", suffix=target.suffix)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _check_out_dir(*paths: Optional[str]) -> None:
    for p in paths:
        if p not in (None, "-") and not Path(p).resolve().parent.is_dir():
            raise UsageError(f"output directory does not exist: {Path(p).parent}")


def _g(v: float) -> str:
    return format(float(v), ".17g")


def _asym(args) -> A.AsymParams:
    return A.AsymParams(args.gamma, 1.0 if getattr(args, "q1", False) else args.qq)


# ---------------------------------------------------------------- exact

def cmd_exact(args) -> int:
    w = weights(args)
    if args.what == "single":
        if args.i < 0 or args.j < 0:
            raise UsageError("--i and --j must be >= 0")
        v = exact.single_path_Z(args.i, args.j, w)
        print(v)
        print(f"decimal {decimal_str(v)}")
        return 0
    if args.what == "escape":
        if args.r < 1 or args.ell < 0:
            raise UsageError("need --ell >= 0 and --r >= 1")
        v = lgv.escape_Y(args.ell, args.r, w)
        print(v)
        print(f"decimal {decimal_str(v)}")
        return 0
    cfg = config_from_defects(args.defects, args.n, args.m)
    if args.what == "partition":
        d = lgv.partition_det(cfg, w)
        prod = lgv.partition_product(cfg, w)
        print(d)
        print(f"decimal {decimal_str(d)}")
        print(f"product {prod}")
        print(f"equal {'true' if d == prod else 'false'}")
        return 0
    if not 0 <= args.ell <= cfg.m:
        raise UsageError(f"--ell must lie in [0, {cfg.m}]")
    v = lgv.one_point_H(cfg, args.ell, w)
    print(v)
    print(f"decimal {decimal_str(v)}")
    return 0


# ---------------------------------------------------------------- curves

def curve_svg(profile: P.BoundaryProfile, samples: list[A.CurveSample],
              tangencies: Sequence[A.TangencyPoint], title: str) -> svg.Figure:
    mu = float(profile.mu)
    fig = svg.Figure(mu, 1.0, title)
    fig.axes()
    tags = list(dict.fromkeys(s.interval_tag for s in samples))
    for k, tag in enumerate(tags):
        pts = [(s.x, s.y) for s in samples if s.interval_tag == tag]
        for run in svg.split_runs(pts, 0.25 * max(mu, 1.0)):
            fig.polyline(run, svg.PALETTE[k % len(svg.PALETTE)], 2.0)
    for tp in tangencies:
        if math.isfinite(tp.x):
            fig.marker(tp.x, 0.0, "#000")
    return fig


def cmd_curve(args) -> int:
    prof = load_profile_arg(args.profile)
    p = _asym(args)
    _check_out_dir(args.out)
    samples, skipped = A.sample_arctic_curve(prof, p, args.samples)
    if skipped:
        print(f"skipped {skipped} singular samples", file=sys.stderr)
    if args.format == "csv":
        lines = ["interval,t,x,y"] + [f"{s.interval_tag},{_g(s.t)},{_g(s.x)},{_g(s.y)}" for s in samples]
        write_output(args.out, "\n".join(lines) + "\n")
    else:
        title = f"{prof.name or 'profile'}  gamma={_g(p.gamma)}  qq={_g(p.qq)}"
        write_output(args.out, curve_svg(prof, samples, A.tangency_points(prof, p), title).render())
    return 0


def geodesic_points(u: float, v: float, p: A.AsymParams, samples: int) -> list[tuple[float, float]]:
    xs = [u * k / (samples - 1) for k in range(samples)]
    pts = [(x, A.geodesic_y(u, v, x, p)) for x in xs]
    # endpoints are exact by construction
    pts[0], pts[-1] = (0.0, v), (u, 0.0)
    return pts


def cmd_geodesic(args) -> int:
    p = _asym(args)
    _check_out_dir(args.out)
    pts = geodesic_points(args.u, args.v, p, args.samples)
    if args.format == "csv":
        write_output(args.out, "x,y\n" + "".join(f"{_g(x)},{_g(y)}\n" for x, y in pts))
    else:
        fig = svg.Figure(args.u, args.v, f"geodesic u={_g(args.u)} v={_g(args.v)} gamma={_g(p.gamma)}")
        fig.axes()
        fig.polyline(pts, svg.PALETTE[0], 2.0)
        write_output(args.out, fig.render())
    return 0


def tangent_family(profile: P.BoundaryProfile, p: A.AsymParams, num: int, samples: int,
                   curve_samples: int) -> tuple[list[tuple[int, float, list[tuple[float, float]]]], list[A.CurveSample]]:
    """``num`` tangent curves (index, t, points over x in [0, mu]) and the arctic curve they envelope."""
    curve = A.arctic_curve(profile, p, curve_samples)
    mu = float(profile.mu)
    if not curve:
        return [], curve
    picks = sorted({round((k + 0.5) * len(curve) / num - 0.5) for k in range(num)})
    out = []
    for idx, k in enumerate(picks):
        t = curve[k].t
        line = A.tangent_line(profile, t, p)
        pts = []
        for s in range(samples):
            x = mu * s / (samples - 1)
            with np.errstate(all="ignore"):
                try:
                    Y = line.solve_Y(p.node(x))
                except ZeroDivisionError:
                    continue
            if p.q1:
                y = Y
            elif Y > 0:
                y = p.to_log(Y)
            else:
                continue
            if math.isfinite(y):
                pts.append((x, y))
        out.append((idx, t, pts))
    return out, curve


def cmd_tangents(args) -> int:
    prof = load_profile_arg(args.profile)
    p = _asym(args)
    _check_out_dir(args.out)
    family, curve = tangent_family(prof, p, args.num, args.samples, args.curve_samples)
    if args.format == "csv":
        lines = ["curve,t,x,y"]
        for idx, t, pts in family:
            lines += [f"tangent{idx},{_g(t)},{_g(x)},{_g(y)}" for x, y in pts]
        lines += [f"arctic,{_g(s.t)},{_g(s.x)},{_g(s.y)}" for s in curve]
        write_output(args.out, "\n".join(lines) + "\n")
        return 0
    fig = curve_svg(prof, curve, [], f"tangent family  gamma={_g(p.gamma)}  qq={_g(p.qq)}")
    for idx, _, pts in family:
        inside = [(x, y) if 0 <= y <= 1 else None for x, y in pts]
        run: list[tuple[float, float]] = []
        for pt in inside + [None]:
            if pt is None:
                fig.polyline(run, "#888", 0.8)
                run = []
            else:
                run.append(pt)
    write_output(args.out, fig.render())
    return 0


# ---------------------------------------------------------------- sampling

def sample_inputs(args) -> tuple[lgv.StartConfig, Optional[P.BoundaryProfile], exact.WeightPair, Optional[float]]:
    """Resolve configuration, weights and overlay qq, all before any sampling starts."""
    if (args.profile is None) == (args.defects is None):
        raise UsageError("give exactly one of --profile or --defects")
    prof = None
    if args.profile is not None:
        if args.n is None or args.n < 1:
            raise UsageError("--n >= 1 is required with --profile")
        prof = load_profile_arg(args.profile)
        try:
            cfg = P.discretize(prof, args.n)
        except P.CollisionError as exc:
            raise UsageError(f"discretization collision: {exc}") from None
    else:
        cfg = config_from_defects(args.defects, args.n, args.m)
    if cfg.n < 1:
        raise UsageError("need at least one path (n >= 1)")

    if args.match_scaling is not None:
        if args.q is not None:
            raise UsageError("--match-scaling computes q; do not also pass --q")
        if args.qq is None:
            raise UsageError("--match-scaling needs --qq")
        if args.match_scaling < 1:
            raise UsageError("--match-scaling N needs N >= 1")
        q = Fraction(args.qq ** (1.0 / args.match_scaling))
    else:
        q = args.q if args.q is not None else Fraction(1)
    try:
        w = exact.WeightPair(args.gamma, q)
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    qq = None
    if args.overlay:
        if prof is None:
            raise UsageError("--overlay needs --profile to draw the predicted curve")
        if args.qq is not None:
            qq = args.qq
        elif q == 1:
            qq = 1.0
        else:
            raise UsageError("--overlay with q != 1 needs an explicit --qq (see --match-scaling)")
    if args.sweeps < 0 or args.burnin < 0:
        raise UsageError("--sweeps and --burnin must be >= 0")
    if args.thin < 1 or args.chains < 1:
        raise UsageError("--thin and --chains must be >= 1")
    return cfg, prof, w, qq


TYPE_COLORS = ("#1f77b4", "#d62728", "#2ca02c")


def overlay_svg(hm: sampler.Heatmap, cfg: lgv.StartConfig, prof: P.BoundaryProfile, gamma: float,
                qq: float) -> str:
    """Heatmap raster (dominant step type, opacity = its share) under the predicted curve."""
    bx, by = hm.bins
    fig = svg.Figure(max(hm.mu, float(prof.mu)), 1.0,
                     f"n={cfg.n}  gamma={_g(gamma)}  qq={_g(qq)}  samples={hm.samples}")
    fracs = np.stack(hm.fractions())
    for k in range(bx):
        for j in range(by):
            t = int(np.argmax(fracs[:, k, j]))
            share = float(fracs[t, k, j])
            if share > 0:
                fig.cell(hm.mu * k / bx, hm.mu * (k + 1) / bx, j / by, (j + 1) / by, TYPE_COLORS[t], share)
    fig.axes()
    p = A.AsymParams(gamma, qq)
    samples, _ = A.sample_arctic_curve(prof, p, 200)
    for run in svg.split_runs([(s.x, s.y) for s in samples], 0.25 * max(float(prof.mu), 1.0)):
        fig.polyline(run, "#000", 2.0)
    return fig.render()


def cmd_sample(args) -> int:
    cfg, prof, w, qq = sample_inputs(args)
    _check_out_dir(args.out, args.overlay)
    hm = sampler.sample_heatmap(cfg, w, args.sweeps, args.burnin, args.seed, args.bins, args.thin,
                                args.start, args.chains, args.workers, args.backend)
    csv_text = hm.to_csv()
    svg_text = overlay_svg(hm, cfg, prof, float(w.gamma), qq) if args.overlay else None
    write_output(args.out, csv_text)
    if svg_text is not None:
        write_output(args.overlay, svg_text)
    return 0


# ---------------------------------------------------------------- misc

def cmd_verify(args) -> int:
    return verify.run(quick=args.quick)


def cmd_profile(args) -> int:
    if args.action == "validate":
        prof = read_profile_arg(args.profile)
        rep = P.validate(prof)
        for v in rep.violations:
            print(f"violation: {v}")
        for v in rep.warnings:
            print(f"warning: {v}")
        if not rep.valid:
            return 2
        print(f"valid mu={prof.mu}")
        for tag in P.classify(prof, None if args.qq is None else args.qq).tags:
            print(f"interval {tag}")
        return 0
    prof = load_profile_arg(args.profile)
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    try:
        cfg = P.discretize(prof, args.n)
    except P.CollisionError as exc:
        raise UsageError(str(exc)) from None
    print(",".join(str(a) for a in cfg.starts))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="aztec-tangent", description=__doc__.splitlines()[0],
                                 epilog=SCALING_NOTE)
    sub = ap.add_subparsers(dest="command", required=True)

    ex = sub.add_parser("exact", help="exact rational weights")
    ex.add_argument("what", choices=["single", "partition", "onepoint", "escape"])
    ex.add_argument("--i", type=int, default=0)
    ex.add_argument("--j", type=int, default=0)
    ex.add_argument("--defects", type=_int_list, default=None, help='comma-separated, e.g. "2,5" or ""')
    ex.add_argument("--n", type=int)
    ex.add_argument("--m", type=int)
    ex.add_argument("--ell", type=int, default=0)
    ex.add_argument("--r", type=int, default=1)
    ex.add_argument("--gamma", type=_fraction, default=Fraction(1), help="exact, e.g. 2/3 or 0.25")
    ex.add_argument("--q", type=_fraction, default=Fraction(1), help="exact, e.g. 2/3 or 0.25")
    ex.set_defaults(func=cmd_exact)

    def asym_args(p):
        p.add_argument("--gamma", type=_nonneg_float, default=1.0)
        p.add_argument("--qq", type=_positive_float, default=1.0, help="rescaled area weight")
        p.add_argument("--q1", action="store_true", help="use the qq = 1 limit (parameter tau)")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--format", choices=["csv", "svg"], default="csv")

    cu = sub.add_parser("curve", help="arctic curve samples")
    cu.add_argument("--profile", required=True, help="profile file or builtin:NAME")
    cu.add_argument("--samples", type=_count(2), default=200, help="samples per admissible interval")
    asym_args(cu)
    cu.set_defaults(func=cmd_curve)

    ge = sub.add_parser("geodesic", help="limiting single-path trajectory from (u,0) to (0,v)")
    ge.add_argument("--u", type=_positive_float, required=True)
    ge.add_argument("--v", type=_positive_float, required=True)
    ge.add_argument("--samples", type=_count(2), default=101)
    asym_args(ge)
    ge.set_defaults(func=cmd_geodesic)

    ta = sub.add_parser("tangents", help="tangent family together with its envelope")
    ta.add_argument("--profile", required=True)
    ta.add_argument("--num", type=_count(1), default=12)
    ta.add_argument("--samples", type=_count(2), default=200, help="points per tangent curve")
    ta.add_argument("--curve-samples", type=_count(2), default=200)
    asym_args(ta)
    ta.set_defaults(func=cmd_tangents)

    sa = sub.add_parser("sample", help="MCMC heatmap of step types", epilog=SCALING_NOTE)
    sa.add_argument("--profile", default=None, help="profile file or builtin:NAME (discretized at --n)")
    sa.add_argument("--defects", type=_int_list, default=None)
    sa.add_argument("--n", type=int)
    sa.add_argument("--m", type=int)
    sa.add_argument("--gamma", type=_fraction, default=Fraction(1))
    sa.add_argument("--q", type=_fraction, default=None, help="finite-size area weight (default 1)")
    sa.add_argument("--qq", type=_positive_float, default=None, help="rescaled weight for the overlay curve")
    sa.add_argument("--match-scaling", type=int, default=None, metavar="N", help="set q = qq^(1/N)")
    sa.add_argument("--sweeps", type=int, default=10000, help="sweeps recorded after burn-in")
    sa.add_argument("--burnin", type=int, default=10000)
    sa.add_argument("--seed", type=int, default=0)
    sa.add_argument("--bins", type=_bins, default=(16, 16), help="BX,BY")
    sa.add_argument("--thin", type=int, default=10)
    sa.add_argument("--chains", type=int, default=1)
    sa.add_argument("--workers", type=_count(1), default=None,
                    help=f"process pool size (default ${sampler.WORKERS_ENV} or 1)")
    sa.add_argument("--start", choices=["min_area", "max_area"], default="min_area")
    sa.add_argument("--backend", choices=["auto", "numba", "python"], default="auto")
    sa.add_argument("--out", default=None, help="heatmap CSV (default stdout)")
    sa.add_argument("--overlay", default=None, metavar="SVG")
    sa.set_defaults(func=cmd_sample)

    ve = sub.add_parser("verify", help="cross-module invariant suite")
    ve.add_argument("--quick", action="store_true")
    ve.set_defaults(func=cmd_verify)

    pr = sub.add_parser("profile", help="inspect boundary profiles")
    pr.add_argument("action", choices=["validate", "discretize"])
    pr.add_argument("profile")
    pr.add_argument("--n", type=int, default=1)
    pr.add_argument("--qq", type=_positive_float, default=None)
    pr.set_defaults(func=cmd_profile)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, lgv.ConfigError, exact.SizeLimitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
