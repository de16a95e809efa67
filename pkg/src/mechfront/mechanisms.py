"""Random mechanisms as exact outcome tables, and their incentive/deficit measures."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, NamedTuple, Sequence

from .desiderata import (DesideratumFn, Outcome, ProfileDistribution, as_fraction,
                         build_plurality, build_veto, majority_count, outcome_deficit)
from .errors import InvalidSettingError, NotInDomainError, SpaceMismatchError
from .prefcore import (AgentPermutation, AltPermutation, PrefOrder, Profile, ProfileSpace,
                       Setting, enumerate_profiles)

WORST = "worst"
EXANTE = "exante"
AXIOMS = ("anonymity", "neutrality", "unanimity", "pareto", "condorcet")
AXIOM_ALIASES = {"anon": "anonymity", "neut": "neutrality", "unan": "unanimity"}


class Mechanism:
    """One ``Outcome`` per profile of ``space``, in canonical profile order."""

    def __init__(self, space: ProfileSpace, table: Iterable[Sequence]):
        self.space = space
        rows = tuple(r if isinstance(r, Outcome) else Outcome(r) for r in table)
        if len(rows) != len(space):
            raise SpaceMismatchError(f"{len(rows)} rows for a space of {len(space)} profiles")
        if any(len(r) != space.m for r in rows):
            raise SpaceMismatchError(f"every row needs {space.m} probabilities")
        self.table = rows

    @classmethod
    def from_function(cls, space: ProfileSpace, fn: Callable[[Profile], Sequence]) -> Mechanism:
        return cls(space, [fn(p) for p in space])

    def __call__(self, p) -> Outcome:
        return self.table[self.space.resolve(p)]

    def prob(self, p, j: int) -> Fraction:
        return self(p)[j]

    def __eq__(self, other):
        if not isinstance(other, Mechanism):
            return NotImplemented
        return self.space == other.space and self.table == other.table

    def __hash__(self):
        return hash(self.table)

    def __repr__(self):
        return f"Mechanism({self.space!r})"


@dataclass(frozen=True)
class UtilityFunction:
    """Utilities in [0, 1] that weakly represent ``order``."""

    u: tuple[Fraction, ...]
    order: PrefOrder

    def __post_init__(self):
        u = tuple(as_fraction(x) for x in self.u)
        object.__setattr__(self, "u", u)
        if len(u) != self.order.m:
            raise ValueError("utility vector length does not match the order")
        if any(x < 0 or x > 1 for x in u):
            raise ValueError(f"utilities must lie in [0, 1]: {u}")
        for a in range(len(u)):
            for b in range(len(u)):
                if self.order.weakly_prefers(a, b) and u[a] < u[b]:
                    raise ValueError(f"{u} does not represent {self.order}")

    @classmethod
    def indicator(cls, order: PrefOrder, k: int) -> UtilityFunction:
        """1 on the alternatives of rank at most ``k``, 0 elsewhere."""
        top = order.top(k)
        return cls(tuple(Fraction(int(j in top)) for j in range(order.m)), order)


class Signature(NamedTuple):
    eps: Fraction
    deficit: Fraction


@dataclass(frozen=True)
class ProblemSpec:
    """Profile space, desideratum and notion of deficit, plus LP axiom options."""

    space: ProfileSpace
    d: DesideratumFn
    deficit_kind: str = WORST
    distribution: ProfileDistribution | None = None
    axioms: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.d.space != self.space:
            raise SpaceMismatchError("desideratum lives on a different space")
        if self.deficit_kind not in (WORST, EXANTE):
            raise ValueError(f"deficit kind must be {WORST!r} or {EXANTE!r}")
        if (self.deficit_kind == EXANTE) != (self.distribution is not None):
            raise ValueError("a distribution is required for, and only for, ex-ante deficit")
        if self.distribution is not None and self.distribution.space != self.space:
            raise SpaceMismatchError("distribution lives on a different space")
        axioms = frozenset(AXIOM_ALIASES.get(a, a) for a in self.axioms)
        unknown = axioms - set(AXIOMS)
        if unknown:
            raise ValueError(f"unknown axioms {sorted(unknown)}")
        object.__setattr__(self, "axioms", axioms)

    @classmethod
    def plurality(cls, n: int = 3, m: int = 3, kind: str = "strict", **kw) -> ProblemSpec:
        space = enumerate_profiles(Setting(n, m), kind)
        return cls(space, build_plurality(space), **kw)

    @classmethod
    def veto(cls, n: int = 3, m: int = 3, kind: str = "strict", **kw) -> ProblemSpec:
        space = enumerate_profiles(Setting(n, m), kind)
        return cls(space, build_veto(space), **kw)

    def with_axioms(self, *axioms: str) -> ProblemSpec:
        return ProblemSpec(self.space, self.d, self.deficit_kind, self.distribution,
                           frozenset(axioms))


# --- incentives -------------------------------------------------------------

def misreport_gain(u: UtilityFunction, p, i: int, alt_order: PrefOrder, mech: Mechanism) -> Fraction:
    """Expected-utility change for agent ``i`` from reporting ``alt_order`` instead of the truth."""
    space = mech.space
    idx = space.resolve(p)
    truthful = space.profiles[idx]
    if u.order != truthful[i]:
        raise ValueError("utility function does not represent the agent's true order")
    deviated = truthful.replace(i, alt_order)
    try:
        dev_idx = space.index(deviated)
    except NotInDomainError:
        raise NotInDomainError(f"misreport {alt_order} leads outside the space") from None
    before, after = mech.table[idx], mech.table[dev_idx]
    return sum((u.u[j] * (after[j] - before[j]) for j in range(space.m)), Fraction(0))


@dataclass(frozen=True)
class ManipulationWitness:
    agent: int
    profile: int
    misreport: PrefOrder
    k: int
    gain: Fraction


def manipulability_witness(mech: Mechanism) -> tuple[Fraction, ManipulationWitness | None]:
    """Manipulability and the binding ``(i, P, P_i', k)``; ``None`` when strategyproof.

    Scans the finite family of top-k indicator utilities; the truthful report
    floors the result at 0.
    """
    space = mech.space
    table = mech.table
    best = Fraction(0)
    witness = None
    tops = {}
    for idx, codes in enumerate(space.codes):
        here = table[idx]
        for i in range(space.n):
            own = codes[i]
            sets = tops.get(own)
            if sets is None:
                order = space.orders[own]
                sets = tops[own] = [(k, sorted(order.top(k))) for k in order.k_levels()]
            for oid, dev in space.deviations(idx, i):
                there = table[dev]
                for k, top in sets:
                    gain = sum(there[j] - here[j] for j in top)
                    if gain > best:
                        best = gain
                        witness = ManipulationWitness(i, idx, space.orders[oid], k, gain)
    return best, witness


def manipulability(mech: Mechanism) -> Fraction:
    return manipulability_witness(mech)[0]


def is_eps_strategyproof(mech: Mechanism, eps) -> bool:
    return manipulability(mech) <= as_fraction(eps)


# --- deficits -------------------------------------------------------------------

def _check_same(mech: Mechanism, d: DesideratumFn):
    if mech.space != d.space:
        raise SpaceMismatchError("mechanism and desideratum live on different spaces")


def profile_deficits(mech: Mechanism, d: DesideratumFn) -> list[Fraction]:
    _check_same(mech, d)
    return [outcome_deficit(d, x, idx) for idx, x in enumerate(mech.table)]


def deficit_worst(mech: Mechanism, d: DesideratumFn) -> Fraction:
    return max(profile_deficits(mech, d))


def worst_profile(mech: Mechanism, d: DesideratumFn) -> int:
    defs = profile_deficits(mech, d)
    return max(range(len(defs)), key=lambda k: (defs[k], -k))


def deficit_exante(mech: Mechanism, d: DesideratumFn, dist: ProfileDistribution) -> Fraction:
    if dist.space != mech.space:
        raise SpaceMismatchError("distribution lives on a different space")
    if sum(dist.weights) != 1:
        raise ValueError("profile weights must sum to 1")
    return sum((w * x for w, x in zip(dist.weights, profile_deficits(mech, d))), Fraction(0))


def deficit(mech: Mechanism, problem: ProblemSpec) -> Fraction:
    if problem.deficit_kind == EXANTE:
        return deficit_exante(mech, problem.d, problem.distribution)
    return deficit_worst(mech, problem.d)


def signature(mech: Mechanism, problem: ProblemSpec) -> Signature:
    if mech.space != problem.space:
        raise SpaceMismatchError("mechanism and problem live on different spaces")
    return Signature(manipulability(mech), deficit(mech, problem))


# --- constructions ----------------------------------------------------------------

def make_hybrid(phi: Mechanism, psi: Mechanism, beta) -> Mechanism:
    """Profile-wise ``(1 - beta) * phi + beta * psi``."""
    beta = as_fraction(beta)
    if not 0 <= beta <= 1:
        raise ValueError(f"beta must lie in [0, 1], got {beta}")
    if phi.space != psi.space:
        raise SpaceMismatchError("hybrid components live on different spaces")
    return Mechanism(phi.space, [
        [(1 - beta) * a + beta * b for a, b in zip(x, y)] for x, y in zip(phi.table, psi.table)])


def mix(mechs: Sequence[Mechanism], weights: Sequence | None = None) -> Mechanism:
    """Convex combination of several mechanisms (uniform weights by default)."""
    if not mechs:
        raise ValueError("nothing to mix")
    space = mechs[0].space
    if any(mm.space != space for mm in mechs):
        raise SpaceMismatchError("components live on different spaces")
    if weights is None:
        weights = [Fraction(1, len(mechs))] * len(mechs)
    weights = [as_fraction(w) for w in weights]
    rows = []
    for idx in range(len(space)):
        rows.append([sum((w * mm.table[idx][j] for w, mm in zip(weights, mechs)), Fraction(0))
                     for j in range(space.m)])
    return Mechanism(space, rows)


def agent_renamed(mech: Mechanism, pi: AgentPermutation) -> Mechanism:
    """``phi^pi(P) = phi(P^pi)``."""
    space = mech.space
    rows = []
    for idx in range(len(space)):
        other = space.agent_permuted_index(idx, pi)
        if other is None:
            raise NotInDomainError("space is not closed under renaming agents")
        rows.append(mech.table[other])
    return Mechanism(space, rows)


def alternative_renamed(mech: Mechanism, varpi: AltPermutation) -> Mechanism:
    """``phi^varpi_j(P) = phi_{varpi(j)}(P^varpi)``."""
    space = mech.space
    rows = []
    for idx in range(len(space)):
        other = space.alt_permuted_index(idx, varpi)
        if other is None:
            raise NotInDomainError("space is not closed under renaming alternatives")
        x = mech.table[other]
        rows.append([x[varpi(j)] for j in range(space.m)])
    return Mechanism(space, rows)


def anonymize(mech: Mechanism) -> Mechanism:
    """Average of ``phi^pi`` over all ``n!`` renamings of the agents."""
    perms = AgentPermutation.all(mech.space.n)
    return mix([agent_renamed(mech, pi) for pi in perms])


def neutralize(mech: Mechanism) -> Mechanism:
    """Average of ``phi^varpi`` over all ``m!`` renamings of the alternatives."""
    perms = AltPermutation.all(mech.space.m)
    return mix([alternative_renamed(mech, w) for w in perms])


def is_anonymous(mech: Mechanism) -> bool:
    return all(agent_renamed(mech, pi) == mech
               for pi in AgentPermutation.generators(mech.space.n))


def is_neutral(mech: Mechanism) -> bool:
    return all(alternative_renamed(mech, w) == mech
               for w in AltPermutation.generators(mech.space.m))


# --- built-in mechanisms ------------------------------------------------------

def _random_dictatorship(p: Profile) -> Outcome:
    m, n = p.orders[0].m, p.n
    probs = [Fraction(0)] * m
    for o in p:
        first = o.classes[0]
        for j in first:
            probs[j] += Fraction(1, n * len(first))
    return Outcome(probs)


def _dictatorship(agent: int):
    def rule(p: Profile) -> Outcome:
        return Outcome.uniform_over(p.orders[0].m, p.orders[agent].classes[0])
    return rule


def _random_duple(p: Profile) -> Outcome:
    m = p.orders[0].m
    pairs = list(itertools.combinations(range(m), 2))
    share = Fraction(1, len(pairs))
    probs = [Fraction(0)] * m
    for a, b in pairs:
        ab, ba = majority_count(p, a, b), majority_count(p, b, a)
        if ab > ba:
            probs[a] += share
        elif ba > ab:
            probs[b] += share
        else:
            probs[a] += share / 2
            probs[b] += share / 2
    return Outcome(probs)


def _uniform_argmax(space: ProfileSpace, d: DesideratumFn) -> Mechanism:
    return Mechanism(space, [Outcome.uniform_over(space.m, d.argmax(idx)) for idx in range(len(space))])


BUILTINS = ("random_dictatorship", "uniform_plurality", "uniform_veto", "random_duple",
            "dictatorship", "constant")


def builtin(name: str, space: ProfileSpace, *, agent: int = 0, outcome: Sequence | None = None) -> Mechanism:
    """Named mechanisms.

    Weak orders are handled by splitting uniformly inside the relevant
    indifference class (first choices) or counting every co-first/co-last
    alternative (Plurality/Veto scores).
    """
    if name == "random_dictatorship":
        return Mechanism.from_function(space, _random_dictatorship)
    if name == "uniform_plurality":
        return _uniform_argmax(space, build_plurality(space))
    if name == "uniform_veto":
        return _uniform_argmax(space, build_veto(space))
    if name == "random_duple":
        return Mechanism.from_function(space, _random_duple)
    if name == "dictatorship":
        if not 0 <= agent < space.n:
            raise InvalidSettingError(f"no agent {agent}")
        return Mechanism.from_function(space, _dictatorship(agent))
    if name == "constant":
        x = Outcome(outcome if outcome is not None else [Fraction(1, space.m)] * space.m)
        if len(x) != space.m:
            raise SpaceMismatchError("constant outcome has the wrong length")
        return Mechanism(space, [x] * len(space))
    raise ValueError(f"unknown mechanism {name!r}; choose from {BUILTINS}")
