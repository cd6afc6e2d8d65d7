from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from aztec_tangent import exact, lgv
from aztec_tangent.exact import WeightPair
from aztec_tangent.lgv import StartConfig
from conftest import rational_weights


@st.composite
def configs(draw, max_n=4, max_m=7):
    m = draw(st.integers(1, max_m))
    n = draw(st.integers(1, m))
    mid = draw(st.lists(st.integers(1, m - 1), min_size=n - 1, max_size=n - 1, unique=True)) if m > 1 else []
    return StartConfig([0] + sorted(mid) + [m])


weights = st.builds(WeightPair, st.fractions(0, 3, max_denominator=5),
                    st.fractions(Fraction(1, 5), 2, max_denominator=5))


def test_start_config_validation():
    with pytest.raises(lgv.ConfigError):
        StartConfig([1, 2])
    with pytest.raises(lgv.ConfigError):
        StartConfig([0, 2, 2])
    with pytest.raises(lgv.ConfigError):
        StartConfig.from_defects([1, 2], 2, 3)
    cfg = StartConfig.from_defects([2], 2, 3)
    assert cfg.starts == (0, 1, 3) and cfg.defects == (2,)


def test_matrix_examples():
    w = WeightPair("3/2", "1/3")
    assert lgv.build_gv_matrix(StartConfig([0]), w) == [[1]]
    g, q = w.gamma, w.q
    assert lgv.build_gv_matrix(StartConfig([0, 1]), w) == [[1, 1], [1, 1 + g * q + q * q]]
    a = lgv.build_gv_matrix(StartConfig([0, 2, 3, 7]), w)
    assert all(v == 1 for v in a[0]) and all(row[0] == 1 for row in a)


def test_small_partition_values():
    g, q = Fraction(2, 3), Fraction(3, 2)
    w = WeightPair(g, q)
    assert lgv.partition_det(StartConfig([0]), w) == 1
    assert lgv.partition_det(StartConfig([0, 1]), w) == q * (g + q)
    assert lgv.partition_product(StartConfig([0, 1]), w) == q * (g + q)
    assert lgv.partition_det(StartConfig([0, 2, 3]), WeightPair(1, 1)) == 24


def test_aztec_counts():
    for n in range(1, 6):
        assert lgv.partition_det(StartConfig.aztec(n), WeightPair(1, 1)) == 2 ** (n * (n + 1) // 2)


def test_det_equals_product_corpus(rng):
    ws = rational_weights(rng, 50, allow_q1=True)
    for k, w in enumerate(ws):
        m = rng.randint(1, 9)
        n = rng.randint(1, min(5, m))
        cfg = StartConfig([0] + sorted(rng.sample(range(1, m), n - 1)) + [m])
        if k % 4 == 0:
            w = WeightPair(w.gamma, 1)
        assert lgv.partition_det(cfg, w) == lgv.partition_product(cfg, w)


@settings(max_examples=40, deadline=None)
@given(cfg=configs(), w=weights)
def test_det_equals_product_property(cfg, w):
    d = lgv.partition_det(cfg, w)
    assert d == lgv.partition_product(cfg, w)
    assert d > 0 or w.gamma == 0


@settings(max_examples=25, deadline=None)
@given(cfg=configs(5, 9), w=weights)
def test_lu_structure(cfg, w):
    if w.q_is_one:
        w = WeightPair(w.gamma, 2)
    linv = lgv.lu_inverse_L(cfg, w)
    assert all(linv[i][i] == 1 for i in range(cfg.n + 1))
    u = lgv.matmul(linv, lgv.build_gv_matrix(cfg, w))
    for i in range(cfg.n + 1):
        assert all(u[i][j] == 0 for j in range(i))
        assert u[i][i] == lgv.u_diagonal(cfg, w, i)


def test_lu_at_q_one():
    cfg, w = StartConfig([0, 2, 3, 6]), WeightPair("1/2", 1)
    u = lgv.matmul(lgv.lu_inverse_L(cfg, w), lgv.build_gv_matrix(cfg, w))
    assert all(u[i][j] == 0 for i in range(4) for j in range(i))


@settings(max_examples=25, deadline=None)
@given(cfg=configs(), w=weights)
def test_one_point_matches_determinant_ratio(cfg, w):
    assert lgv.one_point_H(cfg, 0, w) == 1
    assert lgv.one_point_H(cfg, cfg.m + 1, w) == 0
    for ell in range(cfg.m + 1):
        assert lgv.one_point_H(cfg, ell, w) == lgv.one_point_H_det(cfg, ell, w)


def test_escape_values():
    g, q = Fraction(1, 2), Fraction(3, 4)
    w = WeightPair(g, q)
    assert lgv.escape_Y(0, 3, w) == 1
    assert lgv.escape_Y(2, 1, w) == q ** 4 + g * q ** 3
    assert lgv.escape_Y(1, 2, w) == q * q * (1 + g * q + q * q) + g * q
    with pytest.raises(ValueError):
        lgv.escape_Y(1, 0, w)


def test_det_pivoting_handles_zero_leading_entry():
    assert lgv.det([[0, 1], [1, 0]]) == -1
    assert lgv.det([[0, 0], [1, 1]]) == 0


def test_escape_matches_path_enumeration():
    # continuations from (ell, n) to (0, n + r) whose first step leaves upward
    w = WeightPair("2/3", "3/2")
    for ell in range(1, 4):
        for r in range(1, 4):
            total = Fraction(0)
            for p in exact.enumerate_paths(ell, r):
                if p.steps[0] is exact.Step.LEFT:
                    continue
                area, k = exact.path_area_and_diag(p)
                total += w.gamma ** k * w.q ** area
            assert lgv.escape_Y(ell, r, w) == total
