import json
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from aztec_tangent import profiles as P
from aztec_tangent.profiles import GAP, GENERIC, MINIMAL_SLOPE


def test_validate_accepts_fixtures():
    for make in P.BUILTINS.values():
        assert P.validate(make()).valid


def test_validate_examples():
    assert P.aztec_diamond().mu == 1
    assert P.every_second().mu == 2
    rep = P.validate(P.linear([(0, 1, 0, "1/2")]))
    assert not rep.valid and any("slope < 1" in v for v in rep.violations)


@pytest.mark.parametrize("pieces,needle", [
    ([(0, "1/2", 0, 2)], "end at sigma = 1"),
    ([("1/4", 1, 0, 2)], "start at sigma = 0"),
    ([(0, 1, "1/2", 2)], "alpha(0)"),
    ([(0, "1/2", 0, 2), ("1/2", 1, "1/2", 2)], "alpha decreases"),
    ([(0, "1/2", 0, 2), ("2/3", 1, 2, 2)], "do not meet"),
])
def test_validate_violations(pieces, needle):
    rep = P.validate(P.linear(pieces))
    assert not rep.valid
    assert any(needle in v for v in rep.violations)


def test_boundary_minimal_run_is_flagged_not_rejected():
    rep = P.validate(P.two_minimal_runs())
    assert rep.valid and len(rep.warnings) == 2
    assert not P.validate(P.one_minimal_run()).warnings


def test_discretize_examples():
    assert P.discretize(P.aztec_diamond(), 5).starts == (0, 1, 2, 3, 4, 5)
    assert P.discretize(P.every_second(), 3).starts == (0, 2, 4, 6)
    # floor(4 * (3/4 + 1/2)) = 5
    assert P.discretize(P.fully_frozen(), 4).starts == (0, 1, 2, 5, 6)


def test_discretize_never_collides_on_valid_profiles():
    # slope >= 1 makes n*alpha(k/n) grow by at least 1 per step
    prof = P.linear([(0, "1/2", 0, 1), ("1/2", 1, "1/2", 3)])
    for n in range(1, 30):
        cfg = P.discretize(prof, n)
        assert all(b > a for a, b in zip(cfg.starts, cfg.starts[1:]))
    assert P.discretize(prof, 4).starts == (0, 1, 2, 5, 8)
    with pytest.raises(ValueError):
        P.discretize(prof, 0)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 40), name=st.sampled_from(sorted(P.BUILTINS)))
def test_discretize_converges(n, name):
    prof = P.BUILTINS[name]()
    cfg = P.discretize(prof, n)
    for k, a in enumerate(cfg.starts):
        assert 0 <= prof.alpha(Fraction(k, n)) - Fraction(a, n) < Fraction(1, n)


def test_gaps_and_runs():
    assert P.one_gap().gaps() == [(Fraction(1, 2), 1, 2)]
    assert [len(r) for r in P.one_minimal_run().minimal_runs()] == [1]
    assert len(P.two_minimal_runs().minimal_runs()) == 2
    assert P.aztec_diamond().gaps() == []


def test_profile_round_trip(tmp_path):
    prof = P.one_minimal_run()
    path = tmp_path / "p.json"
    P.save_profile(prof, path)
    again = P.load_profile(path)
    assert again == prof
    assert P.dump_profile(again) == path.read_text()
    rec = json.loads(path.read_text())
    assert rec["segments"][1]["sigma_lo"] == "1/3"


def test_decimal_strings_accepted():
    prof = P.BoundaryProfile.from_dict({"segments": [
        {"sigma_lo": "0", "sigma_hi": "0.5", "alpha_lo": "0", "slope": "2"},
        {"sigma_lo": "0.5", "sigma_hi": "1", "alpha_lo": "1.5", "slope": "1.5"}]})
    assert prof.mu == Fraction(9, 4)
    with pytest.raises(ValueError):
        P.BoundaryProfile.from_dict({"segments": [{"sigma_lo": "0"}]})


def test_reflect_is_involution():
    for make in P.BUILTINS.values():
        prof = make()
        back = P.reflect(P.reflect(prof))
        assert back.segments == prof.segments
        r = P.reflect(prof)
        for s in (Fraction(k, 7) for k in range(8)):
            if not prof.gaps():
                assert r.alpha(s) == prof.mu - prof.alpha(1 - s)


def test_classify_generic_pieces():
    c = P.classify(P.every_second(), 2.0)
    assert [(p.kind, p.lo, p.hi) for p in c.pieces] == [(GENERIC, -math.inf, 1.0), (GENERIC, 16.0, math.inf)]
    assert len(c.tags) == 2
    lo = P.classify(P.every_second(), 0.5)
    assert [(p.lo, p.hi) for p in lo.pieces] == [(-math.inf, 0.5 ** 4), (1.0, math.inf)]


def test_classify_gap_and_runs():
    c = P.classify(P.one_gap(), None)
    assert [(p.lo, p.hi) for p in c.by_kind(GAP)] == [(1.0, 2.0)]
    assert len(c.tags) == 3
    az = P.classify(P.aztec_diamond(), 3.0)
    assert [(p.lo, p.hi) for p in az.by_kind(MINIMAL_SLOPE)] == [(1.0, 9.0)]
    assert len(az.tags) == 1
    assert len(P.classify(P.one_minimal_run(), 1.5).tags) == 3


def test_classify_merges_touching_pieces():
    c = P.classify(P.fully_frozen(), None)
    assert len(c.tags) == 1
    assert {p.kind for p in c.pieces} == {GENERIC, MINIMAL_SLOPE, GAP}
    inner = sorted((p.lo, p.hi) for p in c.pieces if p.kind != GENERIC)
    assert inner[0][0] == 0.0 and inner[-1][1] == 1.5


def test_classify_covers_real_line_for_aztec():
    c = P.classify(P.aztec_diamond(), None)
    for t in (-1e6, -1.0, 0.0, 0.3, 1.0, 7.0, 1e9):
        assert c.contains(t)
