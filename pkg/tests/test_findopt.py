from fractions import Fraction as F

import pytest

from mechfront.desiderata import ProfileDistribution, build_constant, build_plurality, build_veto
from mechfront.errors import InvalidSettingError
from mechfront.findopt import (bar_epsilon_mechanism, build_lp, build_reduced_lp,
                               compute_bar_epsilon, find_opt, symmetry_orbits)
from mechfront.mechanisms import (EXANTE, ProblemSpec, deficit, is_anonymous, is_neutral,
                                  manipulability)
from mechfront.prefcore import Profile, Setting, enumerate_profiles, restrict


def families(lp):
    out = {}
    for c in lp.constraints:
        key = c.name.split("_")[0]
        out[key] = out.get(key, 0) + 1
    return out


def test_layout_and_row_counts(plurality):
    lp = build_lp(plurality, 0)
    assert lp.num_vars == 649
    assert lp.var_names[:4] == ["f_0_0", "f_0_1", "f_0_2", "f_1_0"] and lp.var_names[-1] == "d"
    assert families(lp) == {"sp": 3 * 216 * 5 * 2, "deficit": 216, "prob": 216}
    assert families(build_lp(plurality, 0, include_full_level=True))["sp"] == 9720


def test_weak_row_count_closed_form():
    problem = ProblemSpec.veto(2, 3, "weak")
    space = problem.space
    expected = sum(len(list(space.deviations(idx, i))) * len(space.profiles[idx][i].k_levels())
                   for idx in range(len(space)) for i in range(2))
    assert families(build_lp(problem, 0))["sp"] == expected
    exante = ProblemSpec(space, problem.d, EXANTE, ProfileDistribution.uniform(space))
    assert families(build_lp(exante, 0))["deficit"] == 1


@pytest.mark.parametrize("eps,value", [(0, F(1, 9)), (F(1, 21), F(2, 21)), (F(1, 12), F(1, 12)),
                                       (F(1, 6), F(1, 18)), (F(1, 3), 0), (1, 0)])
def test_plurality_values(plurality, eps, value):
    res = find_opt(plurality, eps)
    assert res.deficit == value
    assert manipulability(res.mechanism) <= eps and deficit(res.mechanism, plurality) == value


@pytest.mark.parametrize("eps,value", [(0, F(2, 9)), (F(1, 21), F(10, 63)), (F(1, 12), F(5, 36)),
                                       (F(1, 16), F(65, 432)), (F(1, 2), 0)])
def test_veto_values(veto, eps, value):
    assert find_opt(veto, eps).deficit == value


def test_monotone_in_eps(veto):
    grid = [F(0), F(1, 40), F(1, 10), F(1, 5), F(2, 5)]
    values = [find_opt(veto, e).deficit for e in grid]
    assert all(a >= b for a, b in zip(values, values[1:]))


def test_bar_epsilon(plurality, veto):
    assert compute_bar_epsilon(plurality) == F(1, 3)
    bar, mech = bar_epsilon_mechanism(veto)
    assert bar == F(1, 2) and manipulability(mech) == bar and deficit(mech, veto) == 0
    space = plurality.space
    assert compute_bar_epsilon(ProblemSpec(space, build_constant(space, F(1, 2)))) == 0


@pytest.mark.parametrize("name", ["plurality", "veto"])
@pytest.mark.parametrize("kind,m", [("strict", 3), ("weak", 2)])
def test_orbit_lp_matches_full_lp(name, kind, m):
    problem = getattr(ProblemSpec, name)(2, m, kind)
    assert build_reduced_lp(problem, 0)[0].num_vars < build_lp(problem, 0).num_vars
    for eps in (F(0), F(1, 7), F(1, 4), F(1, 2)):
        full = find_opt(problem, eps, symmetry=False)
        reduced = find_opt(problem, eps)
        assert reduced.reduced and not full.reduced
        assert full.deficit == reduced.deficit
    assert compute_bar_epsilon(problem) == compute_bar_epsilon(problem, symmetry=False)


@pytest.mark.slow
@pytest.mark.parametrize("name", ["plurality", "veto"])
def test_orbit_lp_matches_full_lp_weak_three_alternatives(name):
    problem = getattr(ProblemSpec, name)(2, 3, "weak")
    eps = F(1, 7)
    assert find_opt(problem, eps, symmetry=False).deficit == find_opt(problem, eps).deficit


def test_orbit_lp_matches_full_lp_exante():
    space = enumerate_profiles(Setting(2, 3), "strict")
    problem = ProblemSpec(space, build_veto(space), EXANTE, ProfileDistribution.uniform(space))
    for eps in (F(0), F(1, 5)):
        assert find_opt(problem, eps).deficit == find_opt(problem, eps, symmetry=False).deficit


def test_no_symmetry_without_invariance():
    space = enumerate_profiles(Setting(2, 3), "strict")
    weights = [F(0)] * len(space)
    weights[1] = weights[2] = F(1, 2)
    skewed = ProblemSpec(space, build_plurality(space), EXANTE, ProfileDistribution(space, weights))
    assert symmetry_orbits(skewed) is None
    res = find_opt(skewed, 0)
    assert not res.reduced and res.deficit == deficit(res.mechanism, skewed)


def test_axiom_rows_enforce_symmetry():
    problem = ProblemSpec.veto(2, 3).with_axioms("anonymity", "neutrality")
    res = find_opt(problem, F(1, 10), symmetry=False)
    assert is_anonymous(res.mechanism) and is_neutral(res.mechanism)
    assert res.deficit == find_opt(ProblemSpec.veto(2, 3), F(1, 10)).deficit


def test_pareto_and_condorcet_rows():
    problem = ProblemSpec.plurality(2, 3).with_axioms("pareto", "condorcet")
    res = find_opt(problem, 0, symmetry=False)
    assert res.deficit >= find_opt(ProblemSpec.plurality(2, 3), 0).deficit
    for idx, p in enumerate(problem.space.profiles):
        x = res.mechanism.table[idx]
        if p[0] == p[1]:
            assert x[p[0].classes[0].__iter__().__next__()] == 1


def test_restricted_domain():
    setting = Setting(2, 3)
    listed = [Profile.parse(a, b) for a in ("a>b>c", "b>a>c") for b in ("a>b>c", "c>b>a")]
    space = restrict(setting, listed)
    problem = ProblemSpec(space, build_plurality(space))
    res = find_opt(problem, 0)
    assert manipulability(res.mechanism) == 0
    assert res.deficit == deficit(res.mechanism, problem)


def test_invalid_eps(plurality):
    with pytest.raises(ValueError):
        find_opt(plurality, F(-1, 2))
    with pytest.raises(ValueError):
        find_opt(plurality, 2)


def test_bar_epsilon_without_admissible_mechanism():
    # an anonymous mechanism must treat (a>b, b>a) and (b>a, a>b) alike, but d demands
    # the first agent's top at both
    setting = Setting(2, 2)
    space = restrict(setting, [Profile.parse("a>b", "b>a"), Profile.parse("b>a", "a>b")])
    from mechfront.desiderata import DesideratumFn
    d = DesideratumFn(space, [[1, 0], [1, 0]])
    sided = DesideratumFn(space, [[1, 0], [0, 1]])
    assert compute_bar_epsilon(ProblemSpec(space, d).with_axioms("anonymity"), symmetry=False) == 0
    with pytest.raises(InvalidSettingError):
        compute_bar_epsilon(ProblemSpec(space, sided).with_axioms("anonymity"), symmetry=False)


@pytest.mark.slow
def test_full_lp_n3_veto_at_zero(veto):
    """The unreduced 6912-row LP agrees with the orbit LP (several CPU-minutes)."""
    res = find_opt(veto, 0, symmetry=False)
    assert res.deficit == F(2, 9) and not res.reduced
    assert res.lp_stats.constraints == 6912
