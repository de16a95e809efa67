import itertools
import random
from fractions import Fraction as F

import pytest

from mechfront.errors import LPValidationError
from mechfront.ratlp import (BLAND, DANTZIG, EQ, GE, INFEASIBLE, LE, OPTIMAL, UNBOUNDED,
                             LinExpr, LPProblem, solve)


def lp_from(c, rows, bounds):
    lp = LPProblem(len(c), LinExpr(dict(enumerate(c))), bounds=bounds)
    for coefs, rel, rhs in rows:
        lp.add_constraint(LinExpr(dict(enumerate(coefs))), rel, rhs)
    return lp


def solve_square(a, b):
    """Exact Gaussian elimination; ``None`` when singular."""
    n = len(a)
    m = [[F(x) for x in r] + [F(v)] for r, v in zip(a, b)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return None
        m[col], m[piv] = m[piv], m[col]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col] / m[col][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [m[r][n] / m[r][r] for r in range(n)]


def vertex_optimum(c, rows, bounds):
    """Best objective over all basic feasible points of a bounded LP; ``None`` if infeasible."""
    n = len(c)
    hyper = [(coefs, rhs) for coefs, _, rhs in rows]
    for v, (lo, hi) in enumerate(bounds):
        unit = [F(int(k == v)) for k in range(n)]
        hyper += [(unit, lo), (unit, hi)]
    eqs = [k for k, (_, rel, _) in enumerate(rows) if rel == EQ]
    best = None
    for pick in itertools.combinations(range(len(hyper)), n):
        if not set(eqs) <= set(pick) and len(eqs) <= n:
            continue
        x = solve_square([hyper[k][0] for k in pick], [hyper[k][1] for k in pick])
        if x is None or not lp_from(c, rows, bounds).is_feasible(x):
            continue
        val = sum(ci * xi for ci, xi in zip(c, x))
        best = val if best is None else min(best, val)
    return best


def random_lp(rng, anchored=True):
    """Box-bounded LP; anchored ones are built around a feasible point."""
    n = rng.randint(2, 4)
    k = rng.randint(1, 8 if n < 4 else 6)
    c = [F(rng.randint(-5, 5)) for _ in range(n)]
    bounds = [(rng.randint(-2, 0), rng.randint(1, 6)) for _ in range(n)]
    point = [F(rng.randint(2 * lo, 2 * hi), 2) for lo, hi in bounds]
    rows = []
    for _ in range(k):
        coefs = [F(rng.randint(-4, 4), rng.choice([1, 2, 3])) for _ in range(n)]
        rel = rng.choice([LE, LE, GE, EQ]) if len(rows) < n - 1 else rng.choice([LE, GE])
        if anchored:
            at = sum(a * x for a, x in zip(coefs, point))
            slack = F(rng.randint(0, 4), 2)
            rhs = at if rel == EQ else at + slack if rel == LE else at - slack
        else:
            rhs = F(rng.randint(-3, 9), rng.choice([1, 2]))
        rows.append((coefs, rel, rhs))
    return c, rows, bounds


def test_textbook_examples():
    lp = LPProblem(1, LinExpr({0: 1}))
    lp.add_constraint(LinExpr({0: 1}), GE, 3)
    lp.add_constraint(LinExpr({0: 1}), LE, 10)
    res = solve(lp)
    assert res.status == OPTIMAL and res.solution == (3,)

    lp = LPProblem(1)
    lp.add_constraint(LinExpr({0: 1}), LE, -1)
    assert solve(lp).status == INFEASIBLE

    lp = lp_from([-1, -1], [([1, 2], LE, 4), ([3, 1], LE, 6)], [(0, None)] * 2)
    for rule in (BLAND, DANTZIG):
        res = solve(lp, pivot_rule=rule)
        assert res.solution == (F(8, 5), F(6, 5)) and res.objective_value == F(-14, 5)


def test_unbounded():
    lp = lp_from([-1, 0], [([1, -1], LE, 2)], [(0, None)] * 2)
    assert solve(lp).status == UNBOUNDED
    free = LPProblem(1, LinExpr({0: 1}), bounds=[(None, None)])
    assert solve(free).status == UNBOUNDED


@pytest.mark.parametrize("seed", range(50))
def test_random_lps_match_vertex_enumeration(seed):
    rng = random.Random(seed)
    c, rows, bounds = random_lp(rng, anchored=seed % 5 != 4)
    expected = vertex_optimum(c, rows, bounds)
    lp = lp_from(c, rows, bounds)
    for kw in ({}, {"pivot_rule": DANTZIG, "perturb": True, "refactor_every": 2, "stall_limit": 1}):
        res = solve(lp, **kw)
        if expected is None:
            assert res.status == INFEASIBLE
        else:
            assert res.status == OPTIMAL
            assert res.objective_value == expected
            assert lp.is_feasible(res.solution)
            assert lp.objective.evaluate(res.solution) == res.objective_value


def test_tied_variables_and_duplicate_rows():
    # x0 == x1 merges; the repeated row is intersected
    rows = [([1, -1, 0], EQ, 0), ([1, 1, 1], LE, 4), ([1, 1, 1], LE, 3), ([0, 0, 1], GE, F(1, 2))]
    c = [-1, 0, -1]
    bounds = [(0, 5)] * 3
    res = solve(lp_from(c, rows, bounds))
    assert res.objective_value == vertex_optimum(c, rows, bounds) == -3


def test_deterministic():
    rng = random.Random(99)
    c, rows, bounds = random_lp(rng)
    lp = lp_from(c, rows, bounds)
    assert solve(lp, pivot_rule=DANTZIG, perturb=True).solution == \
        solve(lp, pivot_rule=DANTZIG, perturb=True).solution


def test_validation_errors():
    lp = LPProblem(2, LinExpr({5: 1}))
    with pytest.raises(LPValidationError):
        solve(lp)
    with pytest.raises(LPValidationError):
        LPProblem(1).add_constraint(LinExpr({0: 1}), "<", 1)
    bad = LPProblem(1, bounds=[(2, 1)])
    with pytest.raises(LPValidationError):
        solve(bad)


def test_linexpr_algebra():
    e = LinExpr({0: 1, 1: 2}, 3) - LinExpr({1: 2})
    assert e.terms == {0: 1} and e.constant == 3
    assert (2 * e).evaluate([F(1, 2)]) == 7


def test_lp_text_dump():
    lp = lp_from([F(1, 2), -1], [([F(1, 3), 1], LE, 2)], [(0, F(3, 2)), (None, 4)])
    text = lp.to_lp_text()
    assert "Minimize" in text and "Subject To" in text and text.rstrip().endswith("End")
    assert " c0: 1 x0 + 3 x1 <= 6" in text
    assert "bnd0hi: 2 x0 <= 3" in text
    assert " -inf <= x1 <= 4" in text
