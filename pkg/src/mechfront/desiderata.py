"""Desideratum functions: societal value tables ``d(j, P)`` in [0, 1].

Tables are dense: one row of ``m`` Fractions per profile of the space.
"""

from __future__ import annotations

import csv
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .errors import SpaceMismatchError
from .prefcore import Profile, ProfileSpace


def as_fraction(x) -> Fraction:
    """Exact conversion; strings may be ``"num/den"``. Floats are rejected."""
    if isinstance(x, float):
        raise TypeError(f"refusing to convert float {x!r}; pass a Fraction or 'num/den' string")
    return Fraction(x)


class Outcome(tuple):
    """A lottery over alternatives: nonnegative rationals summing to exactly 1."""

    def __new__(cls, probs: Iterable):
        probs = tuple(as_fraction(p) for p in probs)
        if any(p < 0 for p in probs):
            raise ValueError(f"negative probability in {probs}")
        if sum(probs) != 1:
            raise ValueError(f"probabilities sum to {sum(probs)}, not 1")
        return super().__new__(cls, probs)

    @classmethod
    def degenerate(cls, m: int, j: int) -> Outcome:
        return cls(Fraction(int(k == j)) for k in range(m))

    @classmethod
    def uniform_over(cls, m: int, support: Iterable[int]) -> Outcome:
        support = set(support)
        if not support:
            raise ValueError("empty support")
        share = Fraction(1, len(support))
        return cls(share if k in support else Fraction(0) for k in range(m))


class DesideratumFn:
    """Values ``d(j, P)`` indexed by (profile index, alternative)."""

    def __init__(self, space: ProfileSpace, values: Iterable[Sequence]):
        self.space = space
        rows = tuple(tuple(as_fraction(v) for v in row) for row in values)
        if len(rows) != len(space):
            raise SpaceMismatchError(f"{len(rows)} rows for a space of {len(space)} profiles")
        for idx, row in enumerate(rows):
            if len(row) != space.m:
                raise SpaceMismatchError(f"row {idx} has {len(row)} entries, expected {space.m}")
            if any(v < 0 or v > 1 for v in row):
                raise ValueError(f"row {idx} has values outside [0, 1]: {row}")
        self.values = rows

    def __getitem__(self, key):
        idx, j = key
        return self.values[idx][j]

    def row(self, p) -> tuple[Fraction, ...]:
        return self.values[self.space.resolve(p)]

    def max(self, p) -> Fraction:
        return max(self.row(p))

    def argmax(self, p) -> frozenset[int]:
        row = self.row(p)
        top = max(row)
        return frozenset(j for j, v in enumerate(row) if v == top)

    def __eq__(self, other):
        if not isinstance(other, DesideratumFn):
            return NotImplemented
        return self.space == other.space and self.values == other.values

    def __repr__(self):
        return f"DesideratumFn({self.space!r})"

    def is_anonymous(self) -> bool:
        from .prefcore import AgentPermutation
        sp = self.space
        for pi in AgentPermutation.generators(sp.n):
            for idx in range(len(sp)):
                other = sp.agent_permuted_index(idx, pi)
                if other is None or self.values[other] != self.values[idx]:
                    return False
        return True

    def is_neutral(self) -> bool:
        from .prefcore import AltPermutation
        sp = self.space
        for w in AltPermutation.generators(sp.m):
            for idx in range(len(sp)):
                other = sp.alt_permuted_index(idx, w)
                if other is None:
                    return False
                if any(self.values[idx][j] != self.values[other][w(j)] for j in range(sp.m)):
                    return False
        return True


class ProfileDistribution:
    """Probability weights over the profiles of a space."""

    def __init__(self, space: ProfileSpace, weights: Iterable):
        weights = tuple(as_fraction(w) for w in weights)
        if len(weights) != len(space):
            raise SpaceMismatchError(f"{len(weights)} weights for {len(space)} profiles")
        if any(w < 0 for w in weights):
            raise ValueError("negative profile weight")
        if sum(weights) != 1:
            raise ValueError(f"profile weights sum to {sum(weights)}, not 1")
        self.space = space
        self.weights = weights

    @classmethod
    def uniform(cls, space: ProfileSpace) -> ProfileDistribution:
        w = Fraction(1, len(space))
        return cls(space, [w] * len(space))

    @classmethod
    def point_mass(cls, space: ProfileSpace, p) -> ProfileDistribution:
        idx = space.resolve(p)
        return cls(space, [Fraction(int(k == idx)) for k in range(len(space))])

    def __getitem__(self, p) -> Fraction:
        return self.weights[self.space.resolve(p)]

    def is_anonymous(self) -> bool:
        from .prefcore import AgentPermutation
        sp = self.space
        for pi in AgentPermutation.generators(sp.n):
            for i in range(len(sp)):
                other = sp.agent_permuted_index(i, pi)
                if other is None or self.weights[other] != self.weights[i]:
                    return False
        return True

    def is_neutral(self) -> bool:
        from .prefcore import AltPermutation
        sp = self.space
        for w in AltPermutation.generators(sp.m):
            for i in range(len(sp)):
                other = sp.alt_permuted_index(i, w)
                if other is None or self.weights[other] != self.weights[i]:
                    return False
        return True


def _first_counts(p: Profile) -> list[int]:
    counts = [0] * p.orders[0].m
    for o in p:
        for j in range(o.m):
            if o.ranks[j] == 1:
                counts[j] += 1
    return counts


def _last_counts(p: Profile) -> list[int]:
    counts = [0] * p.orders[0].m
    for o in p:
        bottom = o.max_rank
        for j in range(o.m):
            if o.ranks[j] == bottom:
                counts[j] += 1
    return counts


def build_plurality(space: ProfileSpace) -> DesideratumFn:
    """``n_j^1 / n``; every co-first alternative of a weak order counts."""
    n = space.n
    return DesideratumFn(space, [[Fraction(c, n) for c in _first_counts(p)] for p in space])


def build_veto(space: ProfileSpace) -> DesideratumFn:
    """``(n - n_j^m) / n`` where ``n_j^m`` counts agents ranking ``j`` last."""
    n = space.n
    return DesideratumFn(space, [[Fraction(n - c, n) for c in _last_counts(p)] for p in space])


def majority_count(p: Profile, a: int, b: int) -> int:
    """Number of agents strictly preferring ``a`` to ``b``."""
    return sum(1 for o in p if o.strictly_prefers(a, b))


def condorcet_winners(p: Profile) -> frozenset[int]:
    m = p.orders[0].m
    return frozenset(j for j in range(m) if all(
        majority_count(p, j, k) >= majority_count(p, k, j) for k in range(m) if k != j))


def unanimity_winners(p: Profile) -> frozenset[int]:
    m = p.orders[0].m
    return frozenset(j for j in range(m) if all(o.ranks[j] == 1 for o in p))


def pareto_optimal(p: Profile) -> frozenset[int]:
    m = p.orders[0].m

    def dominates(a, b):
        return (all(o.weakly_prefers(a, b) for o in p)
                and any(o.strictly_prefers(a, b) for o in p))

    return frozenset(j for j in range(m) if not any(dominates(k, j) for k in range(m) if k != j))


def egalitarian_winners(p: Profile) -> frozenset[int]:
    m = p.orders[0].m
    worst = [max(o.ranks[j] for o in p) for j in range(m)]
    best = min(worst)
    return frozenset(j for j in range(m) if worst[j] == best)


WINNER_SETS: dict[str, Callable[[Profile], frozenset[int]]] = {
    "unanimity-winner": unanimity_winners,
    "pareto-optimal": pareto_optimal,
    "condorcet-winner": condorcet_winners,
    "egalitarian": egalitarian_winners,
}


def _indicator_rows(space: ProfileSpace, winners: Callable[[Profile], Iterable[int]]):
    m = space.m
    rows = []
    for p in space:
        w = set(winners(p))
        rows.append([Fraction(int(j in w)) for j in range(m)])
    return rows


def build_condorcet(space: ProfileSpace) -> DesideratumFn:
    """1 on (weak) Condorcet winners, 0 elsewhere; all zeros without a winner."""
    return DesideratumFn(space, _indicator_rows(space, condorcet_winners))


def build_binary(space: ProfileSpace, prop: str) -> DesideratumFn:
    try:
        winners = WINNER_SETS[prop]
    except KeyError:
        raise ValueError(f"unknown property {prop!r}; choose from {sorted(WINNER_SETS)}") from None
    return DesideratumFn(space, _indicator_rows(space, winners))


def _minmax_scale(row: Sequence[Fraction]) -> list[Fraction]:
    lo, hi = min(row), max(row)
    if hi == lo:
        return [Fraction(0)] * len(row)
    return [(v - lo) / (hi - lo) for v in row]


def positional_scores(p: Profile, v: Sequence[Fraction]) -> list[Fraction]:
    m = p.orders[0].m
    return [sum((v[o.ranks[j] - 1] for o in p), Fraction(0)) for j in range(m)]


def build_positional(space: ProfileSpace, v: Sequence) -> DesideratumFn:
    """Scoring-rule desideratum, min-max scaled per profile.

    ``v[r-1]`` is the score for being ranked ``r``.
    """
    v = [as_fraction(x) for x in v]
    if len(v) != space.m:
        raise ValueError(f"scoring function needs {space.m} entries, got {len(v)}")
    return DesideratumFn(space, [_minmax_scale(positional_scores(p, v)) for p in space])


def build_target(space: ProfileSpace, target) -> DesideratumFn:
    """Desideratum induced by a target mechanism or a target correspondence.

    ``target`` is either a ``Mechanism`` on ``space`` (``d = phi``) or a
    callable mapping a ``Profile`` to the set of selected alternatives.
    """
    if hasattr(target, "table"):
        if target.space != space:
            raise SpaceMismatchError("target mechanism lives on a different space")
        return DesideratumFn(space, target.table)
    if callable(target):
        return DesideratumFn(space, _indicator_rows(space, target))
    raise TypeError("target must be a Mechanism or a callable returning alternatives")


def build_constant(space: ProfileSpace, value=0) -> DesideratumFn:
    value = as_fraction(value)
    return DesideratumFn(space, [[value] * space.m for _ in range(len(space))])


def combine(d1: DesideratumFn, d2: DesideratumFn, mode: str = "min") -> DesideratumFn:
    """Pointwise ``min`` (conjunction) or ``max`` (disjunction)."""
    if d1.space != d2.space:
        raise SpaceMismatchError("cannot combine desiderata on different spaces")
    op = {"min": min, "max": max}.get(mode)
    if op is None:
        raise ValueError(f"mode must be 'min' or 'max', got {mode!r}")
    return DesideratumFn(d1.space, [[op(a, b) for a, b in zip(r1, r2)]
                                    for r1, r2 in zip(d1.values, d2.values)])


def relative_transform(d: DesideratumFn) -> DesideratumFn:
    """Table whose absolute deficit equals the relative deficit under ``d``.

    Each row is min-max scaled by its margin; rows with zero margin become 0.
    """
    return DesideratumFn(d.space, [_minmax_scale(row) for row in d.values])


def relative_deficit(d: DesideratumFn, x: Sequence, p) -> Fraction:
    row = d.row(p)
    margin = max(row) - min(row)
    if margin == 0:
        return Fraction(0)
    return (max(row) - _dot(x, row)) / margin


def _dot(x: Sequence, row: Sequence[Fraction]) -> Fraction:
    if len(x) != len(row):
        raise SpaceMismatchError(f"outcome has {len(x)} entries, expected {len(row)}")
    return sum((as_fraction(a) * b for a, b in zip(x, row)), Fraction(0))


def expected_value(d: DesideratumFn, x: Sequence, p) -> Fraction:
    """Expected d-value ``sum_j x_j d(j, P)``; ``p`` is a Profile or an index."""
    return _dot(x, d.row(p))


def outcome_deficit(d: DesideratumFn, x: Sequence, p) -> Fraction:
    row = d.row(p)
    return max(row) - _dot(x, row)


def read_desideratum_csv(path, space: ProfileSpace) -> DesideratumFn:
    """Columns ``profile_index, alternative, numerator, denominator``; missing cells are 0."""
    values = [[Fraction(0)] * space.m for _ in range(len(space))]
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            idx = int(rec["profile_index"])
            j = int(rec["alternative"])
            if not (0 <= idx < len(space) and 0 <= j < space.m):
                raise ValueError(f"cell ({idx}, {j}) outside the space")
            values[idx][j] = Fraction(int(rec["numerator"]), int(rec["denominator"]))
    return DesideratumFn(space, values)


def write_desideratum_csv(d: DesideratumFn, path) -> None:
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["profile_index", "alternative", "numerator", "denominator"])
        for idx, row in enumerate(d.values):
            for j, v in enumerate(row):
                w.writerow([idx, j, v.numerator, v.denominator])
