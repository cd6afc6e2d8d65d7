from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from aztec_tangent import exact
from aztec_tangent.exact import LatticePath, WeightPair

fractions = st.fractions(min_value=0, max_value=4, max_denominator=6)
positive = st.fractions(min_value=Fraction(1, 6), max_value=4, max_denominator=6)


def test_weight_pair_parses_strings():
    w = WeightPair("2/3", "0.25")
    assert (w.gamma, w.q) == (Fraction(2, 3), Fraction(1, 4))


@pytest.mark.parametrize("g,q", [(-1, 1), (1, 0), (1, -2)])
def test_weight_pair_rejects_out_of_range(g, q):
    with pytest.raises(ValueError):
        WeightPair(g, q)


def test_floats_are_refused():
    with pytest.raises(TypeError):
        exact.as_fraction(0.5)


@pytest.mark.parametrize("a,b,c,q,want", [(1, 0, 1, 2, 5), (3, 0, 0, 7, 1), (1, 1, 1, 1, 6), (2, 0, 2, 1, 6)])
def test_q_trinomial_values(a, b, c, q, want):
    assert exact.q_trinomial(a, b, c, q) == want


def test_path_area_examples():
    assert exact.path_area_and_diag(LatticePath.from_string(1, "D")) == (1, 1)
    assert exact.path_area_and_diag(LatticePath.from_string(1, "LU")) == (0, 0)
    assert exact.path_area_and_diag(LatticePath.from_string(1, "UL")) == (2, 0)
    assert exact.path_area_and_diag(LatticePath(3, ())) == (0, 0)


def test_path_end_and_string_round_trip():
    p = LatticePath.from_string(3, "LDUL")
    assert p.end == (0, 2)
    assert str(p) == "LDUL"
    assert p.vertices()[0] == (3, 0)


def test_single_path_examples():
    g, q = Fraction(3, 2), Fraction(2, 5)
    w = WeightPair(g, q)
    assert exact.single_path_Z(4, 0, w) == 1
    assert exact.single_path_Z(0, 5, w) == 1
    assert exact.single_path_Z(1, 1, w) == 1 + g * q + q * q
    assert exact.single_path_Z(2, 2, WeightPair(1, 1)) == 13
    assert exact.single_path_Z(3, 2, WeightPair(0, 1)) == 10


def test_oracle_on_full_grid(rng):
    from conftest import rational_weights
    for w in rational_weights(rng, 5):
        for i in range(5):
            for j in range(5):
                assert exact.single_path_Z(i, j, w) == exact.brute_force_Z(i, j, w)


@settings(max_examples=40, deadline=None)
@given(i=st.integers(0, 4), j=st.integers(0, 4), g=fractions, q=positive)
def test_oracle_property(i, j, g, q):
    w = WeightPair(g, q)
    assert exact.single_path_Z(i, j, w) == exact.brute_force_Z(i, j, w)


def test_brute_force_guard():
    with pytest.raises(exact.SizeLimitError):
        exact.brute_force_Z(exact.BRUTE_FORCE_LIMIT, 1, WeightPair(1, 1))


def test_enumerate_paths_count_is_delannoy():
    for i in range(5):
        for j in range(5):
            assert len(exact.enumerate_paths(i, j)) == exact.delannoy(i, j)


def test_delannoy_specialization():
    w = WeightPair(1, 1)
    assert [exact.delannoy(n, n) for n in range(6)] == [1, 3, 13, 63, 321, 1683]
    for i in range(8):
        for j in range(8):
            assert exact.single_path_Z(i, j, w) == exact.delannoy(i, j)


def test_z_poly_low_degrees():
    g, q = Fraction(1, 3), Fraction(5, 2)
    w = WeightPair(g, q)
    assert exact.z_poly(0, w) == (1,)
    t = Fraction(7, 3)
    want = ((t * q * q - 1) + g * q * (t - 1)) / (q * q - 1)
    assert exact.poly_eval(exact.z_poly(1, w), t) == want
    assert exact.z_eval(1, q * q, w) == 1 + g * q + q * q


@settings(max_examples=30, deadline=None)
@given(j=st.integers(0, 5), i=st.integers(0, 6), g=fractions, q=positive)
def test_z_poly_interpolates_columns(j, i, g, q):
    w = WeightPair(g, q)
    node = Fraction(i) if w.q_is_one else q ** (2 * i)
    assert exact.poly_eval(exact.z_poly(j, w), node) == exact.single_path_Z(i, j, w)


def test_z_poly_degree():
    for w in (WeightPair(2, 3), WeightPair("1/2", 1)):
        for j in range(6):
            c = exact.z_poly(j, w)
            assert len(c) == j + 1 and c[-1] != 0


def test_recursion():
    w = WeightPair("3/4", "5/3")
    Z = lambda i, j: exact.single_path_Z(i, j, w)  # noqa: E731
    for i in range(1, 6):
        for j in range(1, 6):
            assert Z(i, j) == Z(i - 1, j) + w.gamma * w.q ** (2 * i - 1) * Z(i - 1, j - 1) + w.q ** (2 * i) * Z(i, j - 1)
