import math
import random

import numpy as np
import pytest

from aztec_tangent import asymptotics as A
from aztec_tangent import profiles as P
from aztec_tangent import verify


def test_params_validation():
    with pytest.raises(ValueError):
        A.AsymParams(-1.0, 2.0)
    with pytest.raises(ValueError):
        A.AsymParams(1.0, 0.0)
    assert A.AsymParams(1.0, 1.0).epsilon == 0
    assert A.AsymParams(1.0, 3.0).epsilon == 1
    assert A.AsymParams(1.0, 0.3).epsilon == -1


@pytest.mark.parametrize("qq", [0.5, 1.7])
def test_moment_x_every_second(qq):
    p = A.AsymParams(1.0, qq)
    prof = P.every_second()
    for t in (-3.0, -0.2, qq ** 4 * 1.5, qq ** 4 + 10.0):
        if not P.classify(prof, qq).contains(t):
            continue
        want = qq ** -2 * math.sqrt((t - qq ** 4) / (t - 1))
        assert A.moment_x(prof, t, p) == pytest.approx(want, rel=1e-13)
    assert A.moment_x(prof, 1e12, p) == pytest.approx(qq ** -2, rel=1e-6)


def test_moment_x_aztec_q1():
    p = A.AsymParams(0.7, 1.0)
    for tau in (-4.0, 0.25, 0.5, 3.0):
        assert A.moment_x(P.aztec_diamond(), tau, p) == pytest.approx(1 - 1 / tau, rel=1e-13)
        assert A.moment_x_deriv(P.aztec_diamond(), tau, p) == pytest.approx(1 / tau ** 2, rel=1e-12)


def test_moment_x_undefined_outside_domain():
    p = A.AsymParams(1.0, 2.0)
    assert math.isnan(A.moment_x(P.every_second(), 4.0, p))


def test_moment_x_sign_on_special_intervals():
    g = A.AsymParams(1.0, 1.0)
    assert A.moment_x(P.one_gap(), 1.5, g) > 0
    assert A.moment_x(P.one_minimal_run(), 0.8, g) < 0


def test_deriv_matches_finite_difference():
    rng = random.Random(3)
    done = 0
    while done < 100:
        prof = verify.ENVELOPE_PROFILES[done % 4]()
        p = A.AsymParams(1.0, rng.choice([1.0, 0.6, 1.8]))
        t = verify.random_admissible(prof, p, rng)
        h = 1e-6 * max(1.0, abs(t))
        fd = (A.moment_x(prof, t + h, p) - A.moment_x(prof, t - h, p)) / (2 * h)
        an = A.moment_x_deriv(prof, t, p)
        if not (math.isfinite(fd) and math.isfinite(an)):
            continue
        assert an == pytest.approx(fd, rel=1e-6, abs=1e-9)
        done += 1


def test_deriv_sign_on_generic_intervals():
    for qq, sign in ((2.0, 1), (0.5, -1)):
        p = A.AsymParams(1.0, qq)
        for pc in P.classify(P.every_second(), qq).by_kind(P.GENERIC):
            for t in A.t_grid(pc, 20):
                assert np.sign(A.moment_x_deriv(P.every_second(), float(t), p)) == sign


def test_free_energy_phi_bounds_and_gamma_zero():
    for qq in (0.5, 2.0):
        for u, v in ((1.0, 1.0), (0.5, 2.0), (3.0, 1.0)):
            s0, phi = A.free_energy_S0(u, v, A.AsymParams(1.3, qq))
            assert 0 <= phi <= min(u, v) + 1e-12
            assert math.isfinite(s0)
        _, phi0 = A.free_energy_S0(1.0, 1.0, A.AsymParams(1e-12, qq))
        assert abs(phi0) < 1e-6
    with pytest.raises(ValueError):
        A.free_energy_S0(0.0, 1.0, A.AsymParams(1.0, 2.0))


def test_log_single_path_oracle_matches_exact():
    from fractions import Fraction
    from aztec_tangent import exact
    w = exact.WeightPair(Fraction(3, 2), Fraction(4, 5))
    want = math.log(exact.single_path_Z(7, 5, w))
    assert A.log_single_path_Z(7, 5, 1.5, 0.8) == pytest.approx(want, rel=1e-12)


def test_free_energy_convergence():
    verify.check_free_energy(400)


def test_geodesic_boundary_and_reductions():
    verify.check_geodesic(50)
    p1 = A.AsymParams(1.5, 1.0)
    assert A.geodesic_y(2.0, 3.0, 0.5, p1) == pytest.approx(3.0 * 1.5 / 2.0, abs=1e-15)
    with pytest.raises(ValueError):
        A.geodesic_y(1.0, 1.0, 1.5, A.AsymParams(1.0, 2.0))


def test_geodesic_continuity_at_q1():
    near = A.AsymParams(0.8, 1.0 + 1e-6)
    for x in (0.2, 0.9, 1.4):
        assert A.geodesic_y(1.5, 2.0, x, near) == pytest.approx(2.0 * (1.5 - x) / 1.5, abs=1e-4)


def test_geodesic_residual_symmetry_and_endpoints():
    rng = random.Random(5)
    for _ in range(20):
        X, Y, U, V, g = (rng.uniform(0.2, 5.0) for _ in range(5))
        assert A.geodesic_residual(Y, X, V, U, g) == pytest.approx(A.geodesic_residual(X, Y, U, V, g), rel=1e-12)
        assert abs(A.geodesic_residual(U, 1.0, U, V, g)) <= 1e-9 * verify.geodesic_scale(U, 1.0, U, V, g)
        assert abs(A.geodesic_residual(1.0, V, U, V, g)) <= 1e-9 * verify.geodesic_scale(1.0, V, U, V, g)


def test_saddle_equations_and_bounds():
    verify.check_saddle(100)


def test_saddle_at_x_zero():
    qq = 1.5
    prof = P.every_second()
    s = A.saddle_KFLR(prof, qq ** 4, A.AsymParams(1.0, qq))
    t = qq ** 4
    # closed form at x = 0: F = (1 + gamma) t / (t + gamma), which is 1 only when t = 1
    assert (s.K, s.F) == pytest.approx((1.0, 2 * t / (t + 1)))
    assert 1 <= s.F <= s.L
    assert s.L == pytest.approx(t)
    assert s.R == math.inf


def test_tangent_line_q1_geometry():
    rng = random.Random(8)
    for _ in range(20):
        x, tau, g = rng.uniform(-2, 0.9), rng.uniform(-3, 3), rng.uniform(0, 3)
        line = A.tangent_from_x(x, tau, A.AsymParams(g, 1.0))
        assert line(tau, 0.0) == pytest.approx(0.0, abs=1e-12)
        ref = A.tangent_by_construction(x, tau, g)
        # proportional coefficient vectors
        a = np.array([line.c_Y, line.c_X, line.c_0])
        b = np.array([ref.c_Y, ref.c_X, ref.c_0])
        assert np.linalg.norm(np.cross(a, b)) <= 1e-12 * np.linalg.norm(a) * np.linalg.norm(b)


def test_arctic_point_on_circle_at_tau_one():
    c = A.arctic_point(P.aztec_diamond(), 1.0, A.AsymParams(1.0, 1.0))
    assert (c.x, c.y) == pytest.approx((1.0, 0.5), abs=1e-12)


def test_arctic_point_matches_displayed_formula():
    rng = random.Random(9)
    for _ in range(50):
        prof = verify.ENVELOPE_PROFILES[rng.randrange(4)]()
        p = A.AsymParams(rng.choice([0.5, 1.0, 2.0]), rng.choice([0.5, 2.0]))
        t = verify.random_admissible(prof, p, rng)
        try:
            c = A.arctic_point(prof, t, p)
            Yd = A.arctic_point_displayed_Y(prof, t, p)
        except A.SingularPoint:
            continue
        assert p.qq ** (2 * c.y) == pytest.approx(Yd, rel=1e-6)


def test_curve_fixtures():
    verify.check_circle()
    verify.check_semicircle()


def test_curve_samples_within_box():
    for name, make in P.BUILTINS.items():
        prof = make()
        for qq in (1.0, 0.6, 1.8):
            for c in A.arctic_curve(prof, A.AsymParams(1.0, qq), 60):
                assert -1e-9 <= c.y <= 1 + 1e-9, (name, qq, c)
                assert -1e-9 <= c.x <= float(prof.mu) + 1e-9, (name, qq, c)


def test_curve_approaches_top_tangentially():
    prof, p = P.every_second(), A.AsymParams(1.0, 2.0)
    a, b = (A.arctic_point(prof, t, p) for t in (1e5, 2e5))
    assert a.y == pytest.approx(1.0, abs=1e-4)
    assert abs((b.y - a.y) / (b.x - a.x)) < 1e-2


def test_tangency_fixtures():
    verify.check_tangency()


def test_envelope_property():
    verify.check_envelope(200)


def test_symmetry():
    verify.check_symmetry()


def test_curve_is_deterministic():
    p = A.AsymParams(0.8, 1.3)
    assert A.sample_arctic_curve(P.one_minimal_run(), p, 40) == A.sample_arctic_curve(P.one_minimal_run(), p, 40)


def test_gamma_zero_minimal_slope_tangency_is_degenerate():
    pts = A.tangency_points(P.one_minimal_run(), A.AsymParams(0.0, 1.0))
    assert [tp.degenerate for tp in pts] == [True]
