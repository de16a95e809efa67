"""The manipulability/deficit Pareto frontier.

``delta(eps)`` is convex, decreasing and piecewise linear on ``[0, eps_bar]``
and 0 beyond. The frontier is recovered exactly from finitely many LP
solves: ``find_lower`` certifies a first linear piece by halving, then
``find_bounds`` interpolates and verifies the remaining pieces.

Both algorithms only need an ``eps -> delta(eps)`` oracle, so they run just
as well against synthetic convex functions (see ``DeficitOracle``).
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .desiderata import as_fraction
from .errors import ConsistencyError, DegenerateFrontierError
from .findopt import bar_epsilon_mechanism, compute_bar_epsilon, find_opt
from .mechanisms import Mechanism, ProblemSpec, make_hybrid

log = logging.getLogger(__name__)

MAX_HALVINGS = 64


@dataclass(frozen=True)
class FrontierPoint:
    eps: Fraction
    deficit: Fraction
    representative: Mechanism | None = None


class DeficitOracle:
    """Memoized ``eps -> (delta(eps), representative)`` with a call counter.

    ``solver`` is any callable returning such a pair; ``calls`` counts real
    solver executions. Queries at or beyond ``bar_eps`` are answered with
    ``(0, bar_rep)`` without calling the solver.
    """

    def __init__(self, solver: Callable[[Fraction], tuple[Fraction, Mechanism | None]],
                 bar_eps: Fraction | None = None, bar_rep: Mechanism | None = None):
        self.solver = solver
        self.bar_eps = bar_eps
        self.bar_rep = bar_rep
        self.cache: dict[Fraction, tuple[Fraction, Mechanism | None]] = {}
        self.calls = 0

    @classmethod
    def for_problem(cls, problem: ProblemSpec) -> DeficitOracle:
        bar, rep = bar_epsilon_mechanism(problem)

        def solver(eps):
            res = find_opt(problem, eps)
            return res.deficit, res.mechanism

        return cls(solver, bar, rep)

    @classmethod
    def from_function(cls, fn: Callable[[Fraction], Fraction], bar_eps=None) -> DeficitOracle:
        """Oracle over a plain function, for testing the interpolation logic."""
        return cls(lambda e: (as_fraction(fn(e)), None),
                   None if bar_eps is None else as_fraction(bar_eps))

    def __call__(self, eps) -> Fraction:
        return self.evaluate(eps)[0]

    def evaluate(self, eps) -> tuple[Fraction, Mechanism | None]:
        eps = as_fraction(eps)
        if self.bar_eps is not None and eps >= self.bar_eps:
            return Fraction(0), self.bar_rep
        hit = self.cache.get(eps)
        if hit is None:
            hit = self.solver(eps)
            self.calls += 1
            self.cache[eps] = hit
        return hit


def signature_at(problem: ProblemSpec, eps) -> tuple[Fraction, Fraction]:
    """``(eps, delta(eps))``; beyond ``eps_bar`` the deficit is 0."""
    eps = as_fraction(eps)
    if eps < 0:
        raise ValueError("manipulability bound must be nonnegative")
    if eps >= 1:
        return eps, Fraction(0)
    return eps, find_opt(problem, eps).deficit


def _collinear(p, q, r) -> bool:
    return (q[0] - p[0]) * (r[1] - p[1]) == (r[0] - p[0]) * (q[1] - p[1])


def find_lower(problem_or_oracle) -> Fraction:
    """Largest probed ``eps`` up to which ``delta`` is certified linear.

    Halves ``eps`` from 1/2; stops once ``(0, delta(0))``, ``(eps, .)`` and the
    previous probe are collinear, which by convexity proves linearity on
    ``[0, previous]``. The returned value is that previous probe.
    """
    oracle = _as_oracle(problem_or_oracle)
    d0 = oracle(0)
    if d0 == 0:
        raise DegenerateFrontierError("delta(0) = 0: the frontier is the single point (0, 0)")
    origin = (Fraction(0), d0)
    prev = Fraction(1, 2)
    prev_pt = (prev, oracle(prev))
    for _ in range(MAX_HALVINGS):
        eps = prev / 2
        pt = (eps, oracle(eps))
        if _collinear(origin, pt, prev_pt):
            return prev
        prev, prev_pt = eps, pt
    raise ConsistencyError(f"no linear first piece found after {MAX_HALVINGS} halvings",
                           {"last_eps": prev})


def _as_oracle(x) -> DeficitOracle:
    if isinstance(x, DeficitOracle):
        return x
    if isinstance(x, ProblemSpec):
        return DeficitOracle.for_problem(x)
    raise TypeError("expected a ProblemSpec or a DeficitOracle")


class _Line:
    __slots__ = ("slope", "icpt")

    def __init__(self, p, q):
        self.slope = (q[1] - p[1]) / (q[0] - p[0])
        self.icpt = p[1] - self.slope * p[0]

    def __call__(self, x):
        return self.slope * x + self.icpt


def find_bounds(problem_or_oracle, eps_under) -> ParetoFrontier:
    """All supporting manipulability bounds, given ``[0, eps_under]`` is linear.

    Works left to right over the first unverified interval ``[a, b]``
    between probed points. The secant lines of the neighbouring intervals
    bound ``delta`` from below on ``[a, b]`` and the chord bounds it from
    above; the next probe is where the two secants meet. A probe on both
    secants is a kink and settles both halves; a probe on the chord proves
    ``[a, b]`` linear; anything else splits the interval.
    """
    oracle = _as_oracle(problem_or_oracle)
    eps_under = as_fraction(eps_under)
    if oracle.bar_eps is None:
        raise ValueError("find_bounds needs an oracle that knows eps_bar")
    bar = oracle.bar_eps
    if oracle(0) == 0:
        raise DegenerateFrontierError("delta(0) = 0")
    if not 0 < eps_under <= bar:
        raise ValueError(f"eps_under must lie in (0, {bar}]")
    oracle(eps_under)
    xs = sorted({e for e in oracle.cache if e < bar} | {Fraction(0), eps_under, bar})
    val = {x: oracle(x) for x in xs}
    verified: set[Fraction] = {x for x in xs if 0 <= x < eps_under}  # interval starts

    def pt(x):
        return (x, val[x])

    while True:
        # collinear consecutive triples certify both intervals
        for k in range(len(xs) - 2):
            if _collinear(pt(xs[k]), pt(xs[k + 1]), pt(xs[k + 2])):
                verified.update((xs[k], xs[k + 1]))
        todo = [k for k in range(len(xs) - 1) if xs[k] not in verified]
        if not todo:
            break
        k = todo[0]
        a, b = xs[k], xs[k + 1]
        if k == 0:
            raise ConsistencyError("first interval is not certified linear", {"a": a, "b": b})
        left = _Line(pt(xs[k - 1]), pt(a))
        right = _Line(pt(b), pt(xs[k + 2])) if k + 2 < len(xs) else None
        right_slope = right.slope if right is not None else Fraction(0)
        right_icpt = right.icpt if right is not None else Fraction(0)
        if left.slope == right_slope:
            verified.add(a)
            continue
        cut = (right_icpt - left.icpt) / (left.slope - right_slope)
        if not a <= cut <= b:
            raise ConsistencyError("neighbouring secants meet outside their gap: delta is not convex",
                                   {"a": a, "b": b, "intersection": cut, "points": dict(val)})
        if cut in (a, b):
            verified.add(a)
            continue
        y = oracle(cut)
        chord = _Line(pt(a), pt(b))
        floor = left(cut)
        if y < floor or y > chord(cut):
            raise ConsistencyError("probe violates convexity bounds",
                                   {"eps": cut, "deficit": y, "lower": floor, "upper": chord(cut)})
        xs.insert(k + 1, cut)
        val[cut] = y
        if y == floor or y == chord(cut):
            verified.update((a, cut))
    return _assemble(oracle, xs, val)


def _assemble(oracle: DeficitOracle, xs, val) -> ParetoFrontier:
    keep = [xs[0]]
    for k in range(1, len(xs) - 1):
        if not _collinear((keep[-1], val[keep[-1]]), (xs[k], val[xs[k]]), (xs[k + 1], val[xs[k + 1]])):
            keep.append(xs[k])
    keep.append(xs[-1])
    points = [FrontierPoint(x, val[x], oracle.evaluate(x)[1]) for x in keep]
    frontier = ParetoFrontier(points, oracle.calls)
    problems = frontier.shape_violations()
    if problems:
        raise ConsistencyError("recovered frontier is not convex and decreasing",
                               {"violations": problems, "points": dict(val)})
    return frontier


@dataclass
class ParetoFrontier:
    points: list[FrontierPoint]
    lp_calls: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def bounds(self) -> list[Fraction]:
        return [p.eps for p in self.points]

    @property
    def deficits(self) -> list[Fraction]:
        return [p.deficit for p in self.points]

    @property
    def bar_eps(self) -> Fraction:
        return self.points[-1].eps

    @property
    def slopes(self) -> list[Fraction]:
        ps = self.points
        return [(ps[k + 1].deficit - ps[k].deficit) / (ps[k + 1].eps - ps[k].eps)
                for k in range(len(ps) - 1)]

    def shape_violations(self) -> list[tuple[str, Fraction]]:
        """Failed shape checks as ``(check, witness eps)`` pairs."""
        out = []
        ps = self.points
        if ps[0].eps != 0:
            out.append(("starts at 0", ps[0].eps))
        if ps[-1].deficit != 0:
            out.append(("zero deficit at eps_bar", ps[-1].eps))
        for k in range(len(ps) - 1):
            if ps[k + 1].eps <= ps[k].eps:
                out.append(("increasing bounds", ps[k + 1].eps))
            elif ps[k + 1].deficit >= ps[k].deficit:
                out.append(("decreasing deficits", ps[k + 1].eps))
        if not [v for v in out if v[0] == "increasing bounds"]:
            s = self.slopes
            for k in range(len(s) - 1):
                if s[k + 1] <= s[k]:
                    out.append(("increasing slopes", ps[k + 1].eps))
        return out

    def _segment(self, eps: Fraction) -> int:
        ps = self.points
        for k in range(1, len(ps)):
            if eps <= ps[k].eps:
                return k
        return len(ps) - 1

    def delta_at(self, eps) -> Fraction:
        eps = as_fraction(eps)
        if not 0 <= eps <= 1:
            raise ValueError("eps must lie in [0, 1]")
        ps = self.points
        if eps >= ps[-1].eps:
            return ps[-1].deficit
        k = self._segment(eps)
        lo, hi = ps[k - 1], ps[k]
        t = (eps - lo.eps) / (hi.eps - lo.eps)
        return lo.deficit + t * (hi.deficit - lo.deficit)

    def mechanism_at(self, eps) -> Mechanism:
        """Representative at a stored bound, otherwise the hybrid of its neighbours."""
        eps = as_fraction(eps)
        if eps < 0:
            raise ValueError("eps must be nonnegative")
        ps = self.points
        if eps >= ps[-1].eps:
            return ps[-1].representative
        for p in ps:
            if p.eps == eps:
                return p.representative
        k = self._segment(eps)
        lo, hi = ps[k - 1], ps[k]
        beta = (eps - lo.eps) / (hi.eps - lo.eps)
        return make_hybrid(lo.representative, hi.representative, beta)

    def sample(self, k: int) -> list[tuple[Fraction, Fraction]]:
        """``k + 1`` evenly spaced ``(eps, delta)`` pairs over ``[0, eps_bar]``."""
        if k < 1:
            raise ValueError("need at least one interval")
        bar = self.bar_eps
        return [(bar * t / k, self.delta_at(bar * t / k)) for t in range(k + 1)]


def compute_frontier(problem: ProblemSpec) -> ParetoFrontier:
    """``find_lower`` then ``find_bounds``; a zero deficit at 0 gives a one-point frontier."""
    oracle = DeficitOracle.for_problem(problem)
    d0, rep0 = oracle.evaluate(0)
    if d0 == 0:
        log.warning("delta(0) = 0; the frontier is the single point (0, 0)")
        return ParetoFrontier([FrontierPoint(Fraction(0), Fraction(0), rep0)], oracle.calls)
    eps_under = find_lower(oracle)
    frontier = find_bounds(oracle, eps_under)
    frontier.meta["eps_under"] = eps_under
    frontier.meta["probes"] = sorted(oracle.cache)
    return frontier


@dataclass
class ValidationReport:
    checks: list[tuple[str, bool, Fraction | None]]
    midpoint_solves: int

    @property
    def ok(self) -> bool:
        return all(passed for _, passed, _ in self.checks)

    def failures(self):
        return [(name, witness) for name, passed, witness in self.checks if not passed]


def _midpoint_deficit(args):
    problem, eps = args
    return find_opt(problem, eps).deficit


def validate(frontier: ParetoFrontier, problem: ProblemSpec, jobs: int = 1) -> ValidationReport:
    """Shape checks plus an independent solve at every segment midpoint."""
    checks: list[tuple[str, bool, Fraction | None]] = []
    bad = frontier.shape_violations()
    for name in ("decreasing deficits", "increasing slopes", "zero deficit at eps_bar",
                 "increasing bounds", "starts at 0"):
        hits = [w for n, w in bad if n == name]
        checks.append((name, not hits, hits[0] if hits else None))
    bar = compute_bar_epsilon(problem)
    checks.append(("eps_bar matches", frontier.bar_eps == bar, frontier.bar_eps))
    ps = frontier.points
    mids = [(ps[k].eps + ps[k + 1].eps) / 2 for k in range(len(ps) - 1)]
    if jobs > 1 and len(mids) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            got = list(pool.map(_midpoint_deficit, [(problem, e) for e in mids]))
    else:
        got = [find_opt(problem, e).deficit for e in mids]
    for eps, value in zip(mids, got):
        checks.append(("midpoint equality", value == frontier.delta_at(eps), eps))
    return ValidationReport(checks, len(mids))
