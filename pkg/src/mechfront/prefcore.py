"""Preference orders, profiles, profile spaces and renaming actions.

Alternatives are the integers ``0..m-1`` (printed as ``a, b, c, ...``) and
agents are ``0..n-1``. Orders are stored as indifference classes, best
first. Every enumeration here is deterministic: orders are sorted by their
rank vector and profiles lexicographically by per-agent order ids, so
profile indices are stable across runs.
"""

from __future__ import annotations

import itertools
import string
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

from .errors import DomainTooLargeError, InvalidSettingError, NotInDomainError

STRICT = "strict"
WEAK = "weak"
EXPLICIT = "explicit"

DEFAULT_MAX_VARIABLES = 10**6


@dataclass(frozen=True)
class Setting:
    n: int
    m: int

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise InvalidSettingError(f"need at least one agent, got n={self.n!r}")
        if not isinstance(self.m, int) or self.m < 2:
            raise InvalidSettingError(f"need at least two alternatives, got m={self.m!r}")


def alt_name(j: int) -> str:
    return string.ascii_lowercase[j] if j < 26 else f"x{j}"


def _alt_index(token: str) -> int:
    token = token.strip()
    if token.isdigit():
        return int(token)
    if len(token) == 1 and token in string.ascii_lowercase:
        return string.ascii_lowercase.index(token)
    if token.startswith("x") and token[1:].isdigit():
        return int(token[1:])
    raise InvalidSettingError(f"unknown alternative {token!r}")


@dataclass(frozen=True)
class PrefOrder:
    """A weak order given by its indifference classes, best class first."""

    classes: tuple[frozenset[int], ...]
    ranks: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        classes = tuple(frozenset(c) for c in self.classes)
        object.__setattr__(self, "classes", classes)
        members = [j for c in classes for j in c]
        m = len(members)
        if any(not c for c in classes) or sorted(members) != list(range(m)):
            raise InvalidSettingError(f"classes {classes!r} do not partition the alternatives")
        ranks = [0] * m
        seen = 0
        for c in classes:
            for j in c:
                ranks[j] = seen + 1
            seen += len(c)
        object.__setattr__(self, "ranks", tuple(ranks))

    @classmethod
    def strict(cls, ranking: Iterable[int]) -> PrefOrder:
        return cls(tuple(frozenset((j,)) for j in ranking))

    @classmethod
    def from_ranks(cls, ranks: Sequence[int]) -> PrefOrder:
        levels = sorted(set(ranks))
        return cls(tuple(frozenset(j for j, r in enumerate(ranks) if r == lv) for lv in levels))

    @classmethod
    def parse(cls, text: str) -> PrefOrder:
        """Parse ``"a>b~c"`` (``~`` for indifference, ``>`` for strict preference)."""
        groups = [g for g in text.replace(" ", "").split(">")]
        if any(not g for g in groups):
            raise InvalidSettingError(f"malformed order {text!r}")
        return cls(tuple(frozenset(_alt_index(t) for t in g.split("~")) for g in groups))

    @property
    def m(self) -> int:
        return len(self.ranks)

    @property
    def is_strict(self) -> bool:
        return all(len(c) == 1 for c in self.classes)

    @property
    def max_rank(self) -> int:
        return max(self.ranks)

    def rank(self, j: int) -> int:
        return self.ranks[j]

    def top(self, k: int) -> frozenset[int]:
        """Alternatives of rank at most ``k`` (an upper contour set)."""
        return frozenset(j for j, r in enumerate(self.ranks) if r <= k)

    def k_levels(self) -> tuple[int, ...]:
        """Distinct ranks below the maximum rank.

        These index the non-vacuous upper contour sets; the set at the maximum
        rank contains every alternative.
        """
        top = self.max_rank
        return tuple(sorted(r for r in set(self.ranks) if r < top))

    def weakly_prefers(self, a: int, b: int) -> bool:
        return self.ranks[a] <= self.ranks[b]

    def strictly_prefers(self, a: int, b: int) -> bool:
        return self.ranks[a] < self.ranks[b]

    def __str__(self):
        return ">".join("~".join(alt_name(j) for j in sorted(c)) for c in self.classes)


def rank(order: PrefOrder, j: int) -> int:
    """Number of alternatives strictly preferred to ``j``, plus one."""
    return order.ranks[j]


def _ordered_partitions(items: tuple[int, ...]) -> Iterator[tuple[frozenset[int], ...]]:
    if not items:
        yield ()
        return
    rest_all = items
    for size in range(1, len(rest_all) + 1):
        for first in itertools.combinations(rest_all, size):
            rest = tuple(x for x in rest_all if x not in first)
            for tail in _ordered_partitions(rest):
                yield (frozenset(first),) + tail


@lru_cache(maxsize=None)
def enumerate_orders(m: int, kind: str = STRICT) -> tuple[PrefOrder, ...]:
    """All strict (``m!``) or weak (ordered set partitions) orders over ``m`` alternatives.

    Sorted lexicographically by rank vector ``(rank(P, 0), ..., rank(P, m-1))``.
    """
    if not isinstance(m, int) or m < 2:
        raise InvalidSettingError(f"need at least two alternatives, got m={m!r}")
    if kind == STRICT:
        orders = [PrefOrder.strict(p) for p in itertools.permutations(range(m))]
    elif kind == WEAK:
        orders = [PrefOrder(c) for c in _ordered_partitions(tuple(range(m)))]
    else:
        raise ValueError(f"unknown order kind {kind!r}")
    return tuple(sorted(orders, key=lambda o: o.ranks))


@dataclass(frozen=True)
class Profile:
    orders: tuple[PrefOrder, ...]

    def __post_init__(self):
        object.__setattr__(self, "orders", tuple(self.orders))

    @classmethod
    def parse(cls, *texts: str) -> Profile:
        if len(texts) == 1 and "," in texts[0]:
            texts = tuple(texts[0].split(","))
        return cls(tuple(PrefOrder.parse(t) for t in texts))

    @property
    def n(self) -> int:
        return len(self.orders)

    def __len__(self):
        return len(self.orders)

    def __getitem__(self, i):
        return self.orders[i]

    def __iter__(self):
        return iter(self.orders)

    def replace(self, i: int, order: PrefOrder) -> Profile:
        orders = list(self.orders)
        orders[i] = order
        return Profile(tuple(orders))

    def __str__(self):
        return ", ".join(str(o) for o in self.orders)


def _check_perm(mapping: Sequence[int]) -> tuple[int, ...]:
    mapping = tuple(int(x) for x in mapping)
    if sorted(mapping) != list(range(len(mapping))):
        raise InvalidSettingError(f"{mapping!r} is not a bijection")
    return mapping


@dataclass(frozen=True)
class _Permutation:
    mapping: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "mapping", _check_perm(self.mapping))

    @classmethod
    def identity(cls, size: int):
        return cls(tuple(range(size)))

    @classmethod
    def transposition(cls, size: int, a: int, b: int):
        mapping = list(range(size))
        mapping[a], mapping[b] = b, a
        return cls(tuple(mapping))

    @classmethod
    def all(cls, size: int):
        return [cls(p) for p in itertools.permutations(range(size))]

    @classmethod
    def generators(cls, size: int):
        """Adjacent transpositions; they generate the full symmetric group."""
        return [cls.transposition(size, a, a + 1) for a in range(size - 1)]

    def __call__(self, x: int) -> int:
        return self.mapping[x]

    def __len__(self):
        return len(self.mapping)

    def compose(self, other):
        """``self ∘ other``: apply ``other`` first."""
        return type(self)(tuple(self.mapping[other.mapping[x]] for x in range(len(self.mapping))))

    def inverse(self):
        inv = [0] * len(self.mapping)
        for x, y in enumerate(self.mapping):
            inv[y] = x
        return type(self)(tuple(inv))

    @property
    def is_identity(self) -> bool:
        return all(x == y for x, y in enumerate(self.mapping))


class AgentPermutation(_Permutation):
    """Renaming of agents."""


class AltPermutation(_Permutation):
    """Renaming of alternatives."""


def apply_agent_permutation(p: Profile, pi: AgentPermutation) -> Profile:
    """Agent ``i`` of the result reports the order of agent ``pi(i)`` in ``p``."""
    if len(pi) != p.n:
        raise InvalidSettingError("permutation size does not match the number of agents")
    return Profile(tuple(p.orders[pi(i)] for i in range(p.n)))


def permute_order(order: PrefOrder, varpi: AltPermutation) -> PrefOrder:
    if len(varpi) != order.m:
        raise InvalidSettingError("permutation size does not match the number of alternatives")
    return PrefOrder(tuple(frozenset(varpi(j) for j in c) for c in order.classes))


def apply_alternative_permutation(p: Profile, varpi: AltPermutation) -> Profile:
    """Rename alternatives inside every order: ``varpi(j)`` takes the place of ``j``."""
    return Profile(tuple(permute_order(o, varpi) for o in p.orders))


class ProfileSpace:
    """A canonically ordered, indexed set of admissible profiles.

    Profiles are handled internally as tuples of order ids ("codes") into
    ``self.orders``. For the full strict/weak spaces the index is a mixed
    radix number over the codes; explicit-list spaces use a lookup table.
    """

    def __init__(self, setting: Setting, kind: str, orders: tuple[PrefOrder, ...],
                 codes: Sequence[tuple[int, ...]]):
        self.setting = setting
        self.kind = kind
        self.orders = orders
        self.order_id = {o: k for k, o in enumerate(orders)}
        self.codes = tuple(codes)
        self._full = kind in (STRICT, WEAK)
        self._index = None if self._full else {c: i for i, c in enumerate(self.codes)}
        if self._index is not None and len(self._index) != len(self.codes):
            raise InvalidSettingError("duplicate profiles in explicit list")
        self._profiles = None

    @property
    def n(self) -> int:
        return self.setting.n

    @property
    def m(self) -> int:
        return self.setting.m

    @property
    def is_full(self) -> bool:
        return self._full

    @property
    def is_strict(self) -> bool:
        return all(self.orders[k].is_strict for c in self.codes for k in set(c))

    def __len__(self):
        return len(self.codes)

    def __iter__(self):
        return iter(self.profiles)

    def __repr__(self):
        return f"ProfileSpace(n={self.n}, m={self.m}, kind={self.kind!r}, size={len(self)})"

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, ProfileSpace):
            return NotImplemented
        return (self.setting == other.setting and self.kind == other.kind
                and self.orders == other.orders and self.codes == other.codes)

    def __hash__(self):
        return hash((self.setting, self.kind, len(self.codes)))

    @property
    def profiles(self) -> tuple[Profile, ...]:
        if self._profiles is None:
            self._profiles = tuple(self.profile_from_codes(c) for c in self.codes)
        return self._profiles

    def profile_from_codes(self, codes: tuple[int, ...]) -> Profile:
        return Profile(tuple(self.orders[k] for k in codes))

    def codes_of(self, p: Profile) -> tuple[int, ...]:
        if p.n != self.n:
            raise NotInDomainError(f"profile has {p.n} agents, space has {self.n}")
        try:
            return tuple(self.order_id[o] for o in p.orders)
        except KeyError:
            raise NotInDomainError(f"profile {p} uses an order outside this space") from None

    def index_of_codes(self, codes: tuple[int, ...]) -> int | None:
        """Index of a code tuple, or ``None`` when it is not admissible."""
        if self._full:
            k = len(self.orders)
            idx = 0
            for c in codes:
                idx = idx * k + c
            return idx
        return self._index.get(codes)

    def index(self, p: Profile) -> int:
        idx = self.index_of_codes(self.codes_of(p))
        if idx is None:
            raise NotInDomainError(f"profile {p} is not in the space")
        return idx

    def __contains__(self, p: Profile) -> bool:
        try:
            self.index(p)
        except NotInDomainError:
            return False
        return True

    def resolve(self, p) -> int:
        """Accept either a profile index or a ``Profile``."""
        if isinstance(p, Profile):
            return self.index(p)
        idx = int(p)
        if not 0 <= idx < len(self.codes):
            raise NotInDomainError(f"profile index {idx} out of range")
        return idx

    def deviations(self, idx: int, i: int) -> Iterator[tuple[int, int]]:
        """Unilateral misreports of agent ``i`` at profile ``idx`` that stay in the space.

        Yields ``(order_id, deviated_profile_index)``; the truthful report is
        skipped.
        """
        codes = self.codes[idx]
        own = codes[i]
        for k in range(len(self.orders)):
            if k == own:
                continue
            dev = codes[:i] + (k,) + codes[i + 1:]
            j = self.index_of_codes(dev)
            if j is not None:
                yield k, j

    def agent_permuted_index(self, idx: int, pi: AgentPermutation) -> int | None:
        codes = self.codes[idx]
        return self.index_of_codes(tuple(codes[pi(i)] for i in range(self.n)))

    def alt_permuted_index(self, idx: int, varpi: AltPermutation) -> int | None:
        table = self._alt_order_map(varpi.mapping)
        codes = self.codes[idx]
        mapped = tuple(table[c] for c in codes)
        if any(c is None for c in mapped):
            return None
        return self.index_of_codes(mapped)

    @lru_cache(maxsize=None)
    def _alt_order_map(self, mapping: tuple[int, ...]) -> tuple[int | None, ...]:
        varpi = AltPermutation(mapping)
        return tuple(self.order_id.get(permute_order(o, varpi)) for o in self.orders)

    def closed_under_agent_permutations(self) -> bool:
        return self._full or all(
            self.agent_permuted_index(i, pi) is not None
            for pi in AgentPermutation.generators(self.n) for i in range(len(self)))

    def closed_under_alt_permutations(self) -> bool:
        return all(
            self.alt_permuted_index(i, w) is not None
            for w in AltPermutation.generators(self.m) for i in range(len(self)))

    def describe(self) -> dict:
        """JSON-ready descriptor; explicit spaces list their profiles."""
        out = {"n": self.n, "m": self.m, "kind": self.kind}
        if not self._full:
            out["profiles"] = [[str(o) for o in p] for p in self.profiles]
        return out

    @classmethod
    def from_description(cls, desc: dict, max_variables: int = DEFAULT_MAX_VARIABLES) -> ProfileSpace:
        setting = Setting(int(desc["n"]), int(desc["m"]))
        if desc["kind"] == EXPLICIT:
            profiles = [Profile(tuple(PrefOrder.parse(t) for t in row)) for row in desc["profiles"]]
            return restrict(setting, profiles)
        return enumerate_profiles(setting, desc["kind"], max_variables=max_variables)


def enumerate_profiles(setting: Setting, kind: str = STRICT,
                       max_variables: int | None = DEFAULT_MAX_VARIABLES) -> ProfileSpace:
    """The full space of ``|orders|^n`` profiles in canonical order.

    ``max_variables`` caps ``|profiles| * m`` (``None`` disables the cap).
    """
    orders = enumerate_orders(setting.m, kind)
    size = len(orders) ** setting.n
    if max_variables is not None and size * setting.m > max_variables:
        raise DomainTooLargeError(
            f"{size} profiles x {setting.m} alternatives exceeds the cap of {max_variables}")
    codes = itertools.product(range(len(orders)), repeat=setting.n)
    return ProfileSpace(setting, kind, orders, list(codes))


def restrict(setting: Setting, profiles: Iterable[Profile]) -> ProfileSpace:
    """Explicit-list domain restriction (a subset of the weak space).

    Misreports are only considered when the deviated profile is also listed.
    """
    orders = enumerate_orders(setting.m, WEAK)
    order_id = {o: k for k, o in enumerate(orders)}
    codes = set()
    for p in profiles:
        if p.n != setting.n:
            raise InvalidSettingError(f"profile {p} does not have {setting.n} agents")
        try:
            c = tuple(order_id[o] for o in p.orders)
        except KeyError:
            raise InvalidSettingError(f"profile {p} has orders over the wrong alternatives") from None
        if c in codes:
            raise InvalidSettingError(f"duplicate profile {p}")
        codes.add(c)
    return ProfileSpace(setting, EXPLICIT, orders, sorted(codes))
