"""The non-delegated benchmark: exact adaptive probing and its adaptivity gap.

`optimal_adaptive_value` runs a dynamic program over probing states
(probed element set, observed support atoms).  Probing is free, so stopping
early never helps, but the stop action is kept in the maximization for
clarity.  `best_nonadaptive_set` exhaustively scores every outer-feasible
probe set; the ratio of the two is the measured adaptivity gap for the
instance.
"""

from __future__ import annotations

import itertools
from bisect import insort
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import CapacityError
from .instances import Instance, Realization
from .set_systems import iter_feasible_sets, max_weight_feasible

DP_STATE_CAP = 10**6
OUTER_SET_CAP = 10**5

# A DP state is the sorted tuple of probed elements plus, aligned with it,
# the tuple of observed atom indices.
StateKey = tuple[tuple[str, ...], tuple[int, ...]]


@dataclass(frozen=True)
class AdaptiveValueReport:
    expected_value: Fraction
    optimal_first_probes: Mapping[StateKey, str | None]
    state_count: int


@dataclass(frozen=True)
class NonAdaptiveReport:
    best_set: frozenset[str]
    expected_value: Fraction
    ratio_to_adaptive: Fraction


def utility_u(
    instance: Instance, realization: Realization, probed: Iterable[str]
) -> Fraction:
    """Best inner-feasible total x among the probed elements."""
    probed = frozenset(probed)
    extra = probed - frozenset(instance.elements)
    if extra:
        raise ValueError(f"probed elements outside instance: {sorted(extra)}")
    weights = {}
    for e in instance.elements:
        if e in probed:
            weights[e] = instance.dist(e)[realization[e]].x
        else:
            weights[e] = Fraction(0)
    return max_weight_feasible(instance.inner, weights)[1]


def _observed_utility(instance: Instance, state: StateKey) -> Fraction:
    probed, atoms = state
    weights = {e: Fraction(0) for e in instance.elements}
    for e, i in zip(probed, atoms):
        weights[e] = instance.dist(e)[i].x
    return max_weight_feasible(instance.inner, weights)[1]


def _with_probe(state: StateKey, element: str, atom_index: int) -> StateKey:
    probed, atoms = state
    items = sorted(zip(probed, atoms))
    insort(items, (element, atom_index))
    return tuple(e for e, _ in items), tuple(i for _, i in items)


def optimal_adaptive_value(
    instance: Instance, state_cap: int = DP_STATE_CAP
) -> AdaptiveValueReport:
    """Exact value of the optimal adaptive non-delegated probing strategy.

    V(state) = max(u(observed), max over feasible next probes of the
    expected successor value).  Ties prefer stopping, then the smallest
    element id, which makes the extracted policy deterministic.
    """
    values: dict[StateKey, Fraction] = {}
    policy: dict[StateKey, str | None] = {}

    def visit(state: StateKey) -> Fraction:
        if state in values:
            return values[state]
        if len(values) >= state_cap:
            raise CapacityError(f"adaptive DP exceeded {state_cap} states")
        probed = frozenset(state[0])
        best = _observed_utility(instance, state)
        action: str | None = None
        for e in instance.elements:
            if e in probed:
                continue
            if not instance.outer.is_feasible(probed | {e}):
                continue
            expectation = Fraction(0)
            for i, atom in enumerate(instance.dist(e)):
                expectation += atom.prob * visit(_with_probe(state, e, i))
            if expectation > best:
                best = expectation
                action = e
        values[state] = best
        policy[state] = action
        return best

    root: StateKey = ((), ())
    value = visit(root)
    return AdaptiveValueReport(value, policy, len(values))


def nonadaptive_value(instance: Instance, probe_set: Iterable[str]) -> Fraction:
    """Expected u over the product support of a fixed probe set."""
    probe = sorted(frozenset(probe_set))
    extra = set(probe) - set(instance.elements)
    if extra:
        raise ValueError(f"probe set outside instance: {sorted(extra)}")
    supports = [instance.dist(e) for e in probe]
    total = Fraction(0)
    for choice in itertools.product(*(range(len(s)) for s in supports)):
        prob = Fraction(1)
        weights = {e: Fraction(0) for e in instance.elements}
        for e, support, i in zip(probe, supports, choice):
            prob *= support[i].prob
            weights[e] = support[i].x
        total += prob * max_weight_feasible(instance.inner, weights)[1]
    return total


def best_nonadaptive_set(
    instance: Instance,
    set_cap: int = OUTER_SET_CAP,
    state_cap: int = DP_STATE_CAP,
) -> NonAdaptiveReport:
    """Exhaustive best fixed probe set and its ratio to the adaptive optimum.

    Ties prefer larger sets (probing more never hurts), then the smallest
    sorted id tuple.
    """
    best_set: frozenset[str] | None = None
    best_value = Fraction(-1)
    count = 0
    for candidate in iter_feasible_sets(instance.outer):
        count += 1
        if count > set_cap:
            raise CapacityError(f"outer-feasible set count exceeds cap {set_cap}")
        value = nonadaptive_value(instance, candidate)
        if best_set is None:
            best_set, best_value = candidate, value
            continue
        if value > best_value:
            best_set, best_value = candidate, value
        elif value == best_value:
            if (-len(candidate), tuple(sorted(candidate))) < (
                -len(best_set),
                tuple(sorted(best_set)),
            ):
                best_set = candidate
    assert best_set is not None  # the empty set is always feasible
    adaptive = optimal_adaptive_value(instance, state_cap).expected_value
    ratio = best_value / adaptive if adaptive > 0 else Fraction(1)
    return NonAdaptiveReport(best_set, best_value, ratio)
