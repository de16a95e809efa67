import random
from fractions import Fraction as F

import pytest

from conftest import random_outcome
from mechfront import builtin
from mechfront.desiderata import (DesideratumFn, Outcome, ProfileDistribution, as_fraction,
                                  build_binary, build_condorcet, build_constant, build_plurality,
                                  build_positional, build_target, build_veto, combine,
                                  expected_value, outcome_deficit, read_desideratum_csv,
                                  relative_deficit, relative_transform, write_desideratum_csv)
from mechfront.errors import SpaceMismatchError
from mechfront.prefcore import Profile, Setting, enumerate_profiles

S33 = enumerate_profiles(Setting(3, 3), "strict")
W23 = enumerate_profiles(Setting(2, 3), "weak")
P = Profile.parse


def test_plurality_rows():
    d = build_plurality(S33)
    assert d.row(P("a>b>c", "a>c>b", "a>b>c")) == (1, 0, 0)
    assert d.row(P("a>b>c", "a>c>b", "b>a>c")) == (F(2, 3), F(1, 3), 0)
    assert build_plurality(W23).row(P("a~b>c", "c>a~b")) == (F(1, 2), F(1, 2), F(1, 2))


def test_veto_rows():
    d = build_veto(S33)
    assert d.row(P("a>b>c", "b>a>c", "a>b>c")) == (1, 1, 0)
    assert d.row(P("b>c>a", "c>a>b", "a>b>c")) == (F(2, 3),) * 3
    assert d.row(P("a>b>c", "b>a>c", "b>c>a")) == (F(2, 3), 1, F(1, 3))
    assert build_veto(W23).row(P("a>b~c", "a~b~c")) == (F(1, 2), 0, 0)


def test_condorcet_rows():
    d = build_condorcet(S33)
    assert d.row(P("a>b>c", "a>b>c", "a>b>c")) == (1, 0, 0)
    assert d.row(P("a>b>c", "b>c>a", "c>a>b")) == (0, 0, 0)
    assert d.row(P("a>b>c", "a>c>b", "b>c>a")) == (1, 0, 0)


def test_binary_rows():
    assert build_binary(S33, "unanimity-winner").row(P("a>b>c", "a>c>b", "a>b>c")) == (1, 0, 0)
    assert build_binary(S33, "unanimity-winner").row(P("a>b>c", "b>c>a", "a>b>c")) == (0, 0, 0)
    assert build_binary(S33, "pareto-optimal").row(P("a>b>c", "a>b>c", "a>b>c")) == (1, 0, 0)
    assert build_binary(S33, "pareto-optimal").row(P("a>b>c", "b>a>c", "a>b>c")) == (1, 1, 0)
    assert build_binary(S33, "egalitarian").row(P("a>b>c", "c>b>a", "a>c>b")) == (1, 1, 1)
    assert build_binary(S33, "egalitarian").row(P("a>b>c", "b>a>c", "a>b>c")) == (1, 1, 0)
    with pytest.raises(ValueError):
        build_binary(S33, "kemeny")


def test_positional():
    borda = build_positional(S33, [2, 1, 0])
    assert borda.row(P("a>b>c", "a>b>c", "a>b>c")) == (1, F(1, 2), 0)
    assert borda.row(P("a>b>c", "b>c>a", "c>a>b")) == (0, 0, 0)
    plu = build_plurality(S33)
    pos = build_positional(S33, [1, 0, 0])
    for p in S33:
        assert plu.argmax(p) == pos.argmax(p)
    with pytest.raises(ValueError):
        build_positional(S33, [1, 0])


def test_target():
    uni = builtin("constant", S33, outcome=[F(1, 3)] * 3)
    assert set(build_target(S33, uni).values) == {(F(1, 3),) * 3}
    assert set(build_target(S33, lambda p: range(3)).values) == {(1, 1, 1)}
    target = build_target(S33, builtin("uniform_plurality", S33))
    plu = build_plurality(S33)
    for p in S33:
        assert target.argmax(p) == plu.argmax(p)
    with pytest.raises(SpaceMismatchError):
        build_target(W23, uni)


def test_combine():
    d = build_veto(S33)
    zero = build_constant(S33, 0)
    assert combine(d, d, "min") == d
    assert combine(d, zero, "max") == d
    both = combine(build_binary(S33, "unanimity-winner"), build_condorcet(S33), "min")
    assert both.row(P("a>b>c", "a>c>b", "a>b>c")) == (1, 0, 0)
    with pytest.raises(SpaceMismatchError):
        combine(d, build_constant(W23))
    with pytest.raises(ValueError):
        combine(d, d, "avg")


def test_relative_transform():
    space = enumerate_profiles(Setting(1, 3), "strict")
    d = DesideratumFn(space, [[F(1, 2)] * 3, [F(2, 3), F(1, 3), 0]] + [[1, 0, 0]] * 4)
    t = relative_transform(d)
    assert t.values[0] == (0, 0, 0)
    assert t.values[1] == (1, F(1, 2), 0)


def test_relative_deficit_matches_transform():
    rng = random.Random(3)
    space = enumerate_profiles(Setting(2, 3), "strict")
    d = DesideratumFn(space, [[F(rng.randint(0, 6), 6) for _ in range(3)] for _ in range(len(space))])
    t = relative_transform(d)
    for _ in range(50):
        idx = rng.randrange(len(space))
        x = random_outcome(rng, 3)
        assert relative_deficit(d, x, idx) == outcome_deficit(t, x, idx)
        margin = max(d.values[idx]) - min(d.values[idx])
        if margin:
            assert outcome_deficit(t, x, idx) * margin == outcome_deficit(d, x, idx)


def test_expected_value_and_deficit():
    d = build_plurality(S33)
    p = P("a>b>c", "a>c>b", "b>a>c")
    assert expected_value(d, Outcome.degenerate(3, 1), p) == F(1, 3)
    assert outcome_deficit(d, Outcome.degenerate(3, 0), p) == 0
    assert outcome_deficit(d, [F(1, 3)] * 3, p) == F(1, 3)
    space = enumerate_profiles(Setting(1, 3), "strict")
    b = DesideratumFn(space, [[1, F(1, 2), 0]] * 6)
    assert expected_value(b, [F(1, 3)] * 3, 0) == F(1, 2)
    veto = build_veto(S33)
    rd = builtin("random_dictatorship", S33)
    q = P("a>b>c", "a>b>c", "c>b>a")
    assert outcome_deficit(veto, rd(q), q) == F(4, 9)


def test_expected_value_is_linear():
    rng = random.Random(11)
    d = build_veto(S33)
    for _ in range(30):
        idx = rng.randrange(len(S33))
        x, y = random_outcome(rng, 3), random_outcome(rng, 3)
        beta = F(rng.randint(0, 8), 8)
        mixed = [beta * a + (1 - beta) * b for a, b in zip(x, y)]
        assert (expected_value(d, mixed, idx)
                == beta * expected_value(d, x, idx) + (1 - beta) * expected_value(d, y, idx))


def test_validation():
    with pytest.raises(TypeError):
        as_fraction(0.5)
    with pytest.raises(ValueError):
        Outcome([F(1, 2), F(1, 3), 0])
    with pytest.raises(ValueError):
        Outcome([F(3, 2), F(-1, 2), 0])
    with pytest.raises(ValueError):
        build_constant(S33, 2)
    with pytest.raises(ValueError):
        ProfileDistribution(S33, [F(1, 100)] * 216)


def test_symmetry_detection():
    assert build_plurality(S33).is_anonymous() and build_plurality(S33).is_neutral()
    assert build_veto(S33).is_anonymous() and build_veto(S33).is_neutral()
    target = build_target(S33, builtin("dictatorship", S33, agent=0))
    assert not target.is_anonymous() and target.is_neutral()
    assert ProfileDistribution.uniform(S33).is_anonymous()
    assert not ProfileDistribution.point_mass(S33, 5).is_anonymous()


def test_csv_roundtrip(tmp_path):
    d = build_positional(W23, [3, 1, 0])
    write_desideratum_csv(d, tmp_path / "d.csv")
    assert read_desideratum_csv(tmp_path / "d.csv", W23) == d
    (tmp_path / "bad.csv").write_text("profile_index,alternative,numerator,denominator\n0,0,3,2\n")
    with pytest.raises(ValueError):
        read_desideratum_csv(tmp_path / "bad.csv", W23)
