"""The deficit-minimizing LP at a fixed manipulability bound.

Variable layout (part of the external contract): ``f_j(P)`` sits at
``idx * m + j`` for profile index ``idx`` and alternative ``j``; the deficit
variable ``d`` is last, at ``|profiles| * m``.

Row blocks, in order:

1. incentive rows, for every profile, agent, in-space misreport and k-level
   ``k`` of the agent's true order: the probability mass on the true top-k
   set may rise by at most ``eps`` when misreporting;
2. deficit rows: one per profile (worst case) or a single weighted row
   (ex ante);
3. probability rows, one per profile;
4. axiom rows, if requested.

Symmetry. When the desideratum (and the ex-ante weights) are invariant under
renaming agents and/or alternatives, averaging an optimal mechanism over
those renamings keeps it optimal: manipulability and deficit are convex and
renaming-invariant. ``find_opt`` then solves the much smaller LP over
mechanisms that are constant on orbits of ``(profile, alternative)`` pairs
and expands the answer. Pass ``symmetry=False`` to solve the full LP.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, NamedTuple

from .desiderata import as_fraction, condorcet_winners, pareto_optimal, unanimity_winners
from .errors import ConsistencyError, InvalidSettingError
from .mechanisms import EXANTE, Mechanism, ProblemSpec, deficit, manipulability
from .prefcore import AgentPermutation, AltPermutation
from .ratlp import DANTZIG, EQ, GE, LE, LinExpr, LPProblem, LPResult, OPTIMAL, solve

log = logging.getLogger(__name__)

_ONE, _MINUS = Fraction(1), Fraction(-1)


class LPStats(NamedTuple):
    constraints: int
    variables: int
    pivots: int
    phase1_pivots: int


@dataclass(frozen=True)
class FindOptResult:
    eps: Fraction
    mechanism: Mechanism
    deficit: Fraction
    lp_stats: LPStats
    reduced: bool = False


def _check_eps(eps) -> Fraction:
    eps = as_fraction(eps)
    if not 0 <= eps <= 1:
        raise ValueError(f"manipulability bound must lie in [0, 1], got {eps}")
    return eps


def f_var(problem: ProblemSpec, idx: int, j: int) -> int:
    return idx * problem.space.m + j


def d_var(problem: ProblemSpec) -> int:
    return len(problem.space) * problem.space.m


# --- row generators --------------------------------------------------------------
# Each yields ``(terms, relation, rhs, name)`` over the full variable layout;
# the index ``size * m`` stands for the extra variable (``d`` or ``t``).

Row = tuple[dict, str, Fraction, str]


def _incentive_rows(problem: ProblemSpec, include_full_level: bool = False) -> Iterator[dict]:
    space = problem.space
    m = space.m
    tops = {}
    for idx, codes in enumerate(space.codes):
        for i in range(space.n):
            own = codes[i]
            levels = tops.get(own)
            if levels is None:
                order = space.orders[own]
                ks = list(order.k_levels())
                if include_full_level:
                    ks.append(order.max_rank)
                levels = tops[own] = [(k, sorted(order.top(k))) for k in ks]
            for oid, dev in space.deviations(idx, i):
                for k, top in levels:
                    terms = {}
                    for j in top:
                        terms[dev * m + j] = _ONE
                        terms[idx * m + j] = _MINUS
                    yield terms, f"sp_{idx}_{i}_{oid}_{k}"


def _deficit_rows(problem: ProblemSpec) -> Iterator[Row]:
    space, d = problem.space, problem.d
    m, size = space.m, len(space)
    dv = size * m
    if problem.deficit_kind == EXANTE:
        weights = problem.distribution.weights
        terms = {dv: _ONE}
        rhs = Fraction(0)
        for idx in range(size):
            w = weights[idx]
            if not w:
                continue
            row = d.values[idx]
            rhs += w * max(row)
            for j in range(m):
                if row[j]:
                    terms[idx * m + j] = w * row[j]
        yield terms, GE, rhs, "deficit"
        return
    for idx in range(size):
        row = d.values[idx]
        terms = {dv: _ONE}
        terms.update((idx * m + j, row[j]) for j in range(m) if row[j])
        yield terms, GE, max(row), f"deficit_{idx}"


def _probability_rows(problem: ProblemSpec) -> Iterator[Row]:
    m = problem.space.m
    for idx in range(len(problem.space)):
        yield {idx * m + j: _ONE for j in range(m)}, EQ, _ONE, f"prob_{idx}"


def _axiom_rows(problem: ProblemSpec) -> Iterator[Row]:
    space = problem.space
    m = space.m
    axioms = problem.axioms
    if "anonymity" in axioms:
        for g, pi in enumerate(AgentPermutation.generators(space.n)):
            for idx in range(len(space)):
                other = space.agent_permuted_index(idx, pi)
                if other is None:
                    raise InvalidSettingError("anonymity needs a space closed under agent renaming")
                if other > idx:
                    for j in range(m):
                        yield ({idx * m + j: _ONE, other * m + j: _MINUS}, EQ, Fraction(0),
                               f"anon_{g}_{idx}_{j}")
    if "neutrality" in axioms:
        for g, w in enumerate(AltPermutation.generators(m)):
            for idx in range(len(space)):
                other = space.alt_permuted_index(idx, w)
                if other is None:
                    raise InvalidSettingError("neutrality needs a space closed under alternative renaming")
                for j in range(m):
                    a, b = idx * m + j, other * m + w(j)
                    if b > a:
                        yield {a: _ONE, b: _MINUS}, EQ, Fraction(0), f"neut_{g}_{idx}_{j}"
    families = (("unanimity", unanimity_winners, True),
                ("pareto", pareto_optimal, False),
                ("condorcet", condorcet_winners, True))
    for name, winners, only_if_exists in families:
        if name not in axioms:
            continue
        for idx, p in enumerate(space):
            w = winners(p)
            if only_if_exists and not w:
                continue
            for j in range(m):
                if j not in w:
                    yield {idx * m + j: _ONE}, EQ, Fraction(0), f"{name}_{idx}_{j}"


def _findopt_rows(problem: ProblemSpec, eps: Fraction, include_full_level: bool) -> Iterator[Row]:
    for terms, name in _incentive_rows(problem, include_full_level):
        yield terms, LE, eps, name
    yield from _deficit_rows(problem)
    yield from _probability_rows(problem)
    yield from _axiom_rows(problem)


def _bar_rows(problem: ProblemSpec) -> Iterator[Row]:
    tv = len(problem.space) * problem.space.m
    for terms, name in _incentive_rows(problem):
        terms[tv] = _MINUS
        yield terms, LE, Fraction(0), name
    yield from _probability_rows(problem)
    yield from _axiom_rows(problem)


# --- symmetry ---------------------------------------------------------------------

def symmetry_orbits(problem: ProblemSpec) -> list[int] | None:
    """Orbit id of every f-variable under the usable renamings, or ``None``.

    Agent renamings are usable when the space is closed under them and the
    desideratum (and ex-ante weights) are anonymous; likewise alternative
    renamings with neutrality. Every built-in axiom family is invariant
    under both.
    """
    space, d = problem.space, problem.d
    dist = problem.distribution
    agents = (space.n > 1 and space.closed_under_agent_permutations() and d.is_anonymous()
              and (dist is None or dist.is_anonymous()))
    alts = (space.closed_under_alt_permutations() and d.is_neutral()
            and (dist is None or dist.is_neutral()))
    if not (agents or alts):
        return None
    m = space.m
    parent = list(range(len(space) * m))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    for idx in range(len(space)):
        if agents:
            for pi in AgentPermutation.generators(space.n):
                other = space.agent_permuted_index(idx, pi)
                for j in range(m):
                    union(idx * m + j, other * m + j)
        if alts:
            for w in AltPermutation.generators(m):
                other = space.alt_permuted_index(idx, w)
                for j in range(m):
                    union(idx * m + j, other * m + w(j))
    roots = {}
    orbit = []
    for v in range(len(parent)):
        orbit.append(roots.setdefault(find(v), len(roots)))
    if len(roots) == len(parent):
        return None
    return orbit


def _make_lp(rows: Iterator[Row], nf: int, orbit: list[int] | None,
             bounds_f=None, names=None) -> tuple[LPProblem, int]:
    """Assemble an LP over f-variables plus one extra variable.

    With ``orbit`` the f-variables are merged per orbit and duplicate rows
    collapse. Returns the LP and the index of the extra variable.
    """
    if orbit is None:
        nvars = nf + 1
        lp = LPProblem(nvars, LinExpr({nf: 1}), bounds=[(0, 1)] * nvars, var_names=names)
        for terms, rel, rhs, name in rows:
            lp.add_constraint(LinExpr(terms), rel, rhs, name)
        if bounds_f:
            for v, (lo, hi) in bounds_f.items():
                lp.set_bounds(v, lo, hi)
        return lp, nf
    norb = max(orbit) + 1
    lp = LPProblem(norb + 1, LinExpr({norb: 1}), bounds=[(0, 1)] * (norb + 1))
    seen = set()
    for terms, rel, rhs, name in rows:
        acc: dict[int, Fraction] = {}
        for v, c in terms.items():
            key = orbit[v] if v < nf else norb
            acc[key] = acc.get(key, 0) + c
        acc = {k: c for k, c in acc.items() if c}
        sig = (rel, rhs, tuple(sorted(acc.items())))
        if sig in seen:
            continue
        seen.add(sig)
        lp.add_constraint(LinExpr(acc), rel, rhs, name)
    if bounds_f:
        for v, (lo, hi) in bounds_f.items():
            lp.set_bounds(orbit[v], lo, hi)
    return lp, norb


def build_lp(problem: ProblemSpec, eps, include_full_level: bool = False) -> LPProblem:
    """The full FindOpt LP; see the module docstring for the layout.

    ``include_full_level`` also emits the k-level at the bottom rank, whose
    rows are identically ``0 <= eps`` given the probability rows.
    """
    eps = _check_eps(eps)
    size, m = len(problem.space), problem.space.m
    names = [f"f_{idx}_{j}" for idx in range(size) for j in range(m)] + ["d"]
    lp, _ = _make_lp(_findopt_rows(problem, eps, include_full_level), size * m, None, names=names)
    return lp


def build_reduced_lp(problem: ProblemSpec, eps) -> tuple[LPProblem, list[int]] | None:
    """FindOpt over orbit-constant mechanisms, with the orbit map; ``None`` without symmetry."""
    eps = _check_eps(eps)
    orbit = symmetry_orbits(problem)
    if orbit is None:
        return None
    lp, _ = _make_lp(_findopt_rows(problem, eps, False), len(orbit), orbit)
    return lp, orbit


def decode(problem: ProblemSpec, solution, orbit: list[int] | None = None) -> Mechanism:
    m, size = problem.space.m, len(problem.space)
    if orbit is not None:
        solution = [solution[orbit[v]] for v in range(size * m)]
    return Mechanism(problem.space, [solution[idx * m:(idx + 1) * m] for idx in range(size)])


def _stats(lp: LPProblem, res: LPResult) -> LPStats:
    return LPStats(len(lp.constraints), lp.num_vars, res.iterations, res.phase1_iterations)


def _solve(lp: LPProblem, extra: int, hint, pivot_rule: str) -> LPResult:
    return solve(lp, pivot_rule=pivot_rule, initial_upper=list(hint) + [extra], perturb=True)


def find_opt(problem: ProblemSpec, eps, *, verify: bool = True, symmetry: bool = True,
             pivot_rule: str = DANTZIG) -> FindOptResult:
    """Minimal deficit ``delta(eps)`` and the solver's optimal mechanism.

    With ``verify`` the decoded mechanism's manipulability and deficit are
    recomputed on the full problem and must match the LP exactly.
    """
    eps = _check_eps(eps)
    size, m = len(problem.space), problem.space.m
    orbit = symmetry_orbits(problem) if symmetry else None
    lp, extra = _make_lp(_findopt_rows(problem, eps, False), size * m, orbit)
    # without symmetry, "always the first alternative" with d = 1 is a feasible start
    hint = [idx * m for idx in range(size)] if orbit is None else []
    res = _solve(lp, extra, hint, pivot_rule)
    if res.status != OPTIMAL:
        raise ConsistencyError(f"FindOpt LP reported {res.status}", {"eps": eps})
    mech = decode(problem, res.solution, orbit)
    value = res.objective_value
    if verify:
        achieved = manipulability(mech)
        measured = deficit(mech, problem)
        if achieved > eps or measured != value:
            raise ConsistencyError(
                "decoded mechanism disagrees with the LP",
                {"eps": eps, "manipulability": achieved, "deficit": measured, "objective": value})
    stats = _stats(lp, res)
    log.info("find_opt eps=%s: deficit %s (%d rows, %d pivots%s)", eps, value,
             stats.constraints, stats.pivots, ", orbit LP" if orbit else "")
    return FindOptResult(eps, mech, value, stats, orbit is not None)


def maximizing_support(problem: ProblemSpec) -> list[frozenset[int]]:
    """Per profile, the alternatives a d-maximizing mechanism may select.

    Ex ante, profiles of zero weight impose nothing.
    """
    d = problem.d
    full = frozenset(range(problem.space.m))
    out = []
    for idx in range(len(problem.space)):
        if problem.deficit_kind == EXANTE and not problem.distribution.weights[idx]:
            out.append(full)
        else:
            out.append(d.argmax(idx))
    return out


def compute_bar_epsilon(problem: ProblemSpec, **kw) -> Fraction:
    """Smallest manipulability of a d-maximizing mechanism (respecting the axioms)."""
    return bar_epsilon_mechanism(problem, **kw)[0]


def bar_epsilon_mechanism(problem: ProblemSpec, *, symmetry: bool = True,
                          pivot_rule: str = DANTZIG) -> tuple[Fraction, Mechanism]:
    """``eps_bar`` together with a d-maximizing mechanism attaining it."""
    size, m = len(problem.space), problem.space.m
    support = maximizing_support(problem)
    fixed = {idx * m + j: (0, 0) for idx in range(size) for j in range(m) if j not in support[idx]}
    orbit = symmetry_orbits(problem) if symmetry else None
    lp, extra = _make_lp(_bar_rows(problem), size * m, orbit, bounds_f=fixed)
    hint = [idx * m + min(support[idx]) for idx in range(size)] if orbit is None else []
    res = _solve(lp, extra, hint, pivot_rule)
    if res.status != OPTIMAL:
        raise InvalidSettingError("no d-maximizing mechanism satisfies the requested axioms")
    mech = decode(problem, res.solution, orbit)
    if manipulability(mech) != res.objective_value or deficit(mech, problem) != 0:
        raise ConsistencyError("eps_bar LP solution fails recomputation",
                               {"objective": res.objective_value})
    return res.objective_value, mech
