import random
from fractions import Fraction as F
from pathlib import Path

import pytest

from mechfront import (Mechanism, ProblemSpec, Setting, compute_frontier, enumerate_profiles)
from mechfront.prefcore import rank

CONFIGS = Path(__file__).resolve().parent.parent / "docs" / "configs"


@pytest.fixture(scope="session")
def plurality():
    return ProblemSpec.plurality(3, 3)


@pytest.fixture(scope="session")
def veto():
    return ProblemSpec.veto(3, 3)


@pytest.fixture(scope="session")
def plurality_frontier(plurality):
    return compute_frontier(plurality)


@pytest.fixture(scope="session")
def veto_frontier(veto):
    return compute_frontier(veto)


@pytest.fixture(scope="session")
def single_agent_space():
    return enumerate_profiles(Setting(1, 3), "strict")


def example_pair(space):
    """The one-agent pair phi, psi whose 3/7 hybrid is constant."""
    phi, psi = [], []
    for p in space.profiles:
        b_over_c = rank(p[0], 1) < rank(p[0], 2)
        phi.append([F(0), F(2, 3), F(1, 3)] if b_over_c else [F(1, 3)] * 3)
        psi.append([F(5, 9), F(1, 9), F(1, 3)] if b_over_c else [F(1, 9), F(5, 9), F(1, 3)])
    return Mechanism(space, phi), Mechanism(space, psi)


@pytest.fixture(scope="session")
def example_mechs(single_agent_space):
    return example_pair(single_agent_space)


def random_outcome(rng: random.Random, m: int, den: int = 12):
    """Random lottery with denominators dividing ``den``."""
    cuts = sorted(rng.randint(0, den) for _ in range(m - 1))
    parts = [b - a for a, b in zip([0] + cuts, cuts + [den])]
    return [F(x, den) for x in parts]


def random_mechanism(rng: random.Random, space, den: int = 12) -> Mechanism:
    return Mechanism(space, [random_outcome(rng, space.m, den) for _ in range(len(space))])
