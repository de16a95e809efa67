"""Exact manipulability/deficit frontiers for random social choice mechanisms."""

from .desiderata import (DesideratumFn, Outcome, ProfileDistribution, build_binary,
                         build_condorcet, build_constant, build_plurality, build_positional,
                         build_target, build_veto, combine, expected_value, outcome_deficit,
                         relative_transform)
from .errors import (ConsistencyError, DomainTooLargeError, InvalidSettingError,
                     MechFrontError, NotInDomainError, SpaceMismatchError)
from .findopt import FindOptResult, bar_epsilon_mechanism, compute_bar_epsilon, find_opt
from .frontier import (FrontierPoint, ParetoFrontier, compute_frontier, find_bounds,
                       find_lower, validate)
from .mechanisms import (Mechanism, ProblemSpec, Signature, UtilityFunction, anonymize, builtin,
                         deficit_exante, deficit_worst, make_hybrid, manipulability,
                         misreport_gain, neutralize, signature)
from .prefcore import (PrefOrder, Profile, ProfileSpace, Setting, enumerate_orders,
                       enumerate_profiles, rank, restrict)

__version__ = "0.1.0"
