import random
from fractions import Fraction

import pytest

from delegation_lab.errors import CapacityError
from delegation_lab.instances import (
    enumerate_scenarios,
    make_instance,
    table1,
)
from delegation_lab.probing import (
    best_nonadaptive_set,
    nonadaptive_value,
    optimal_adaptive_value,
    utility_u,
)
from delegation_lab.random_instances import (
    random_free_outer_instance,
    random_matroid_outer_instance,
)
from delegation_lab.set_systems import UniformSystem, iter_feasible_sets

from conftest import one_uniform_instance


def test_utility_of_empty_probe_set():
    inst = table1(Fraction(1, 4))
    realization = {"1": 0, "2": 0}
    assert utility_u(inst, realization, set()) == 0


def test_utility_on_table1_scenarios():
    eps = Fraction(1, 4)
    inst = table1(eps)
    jackpot = {"1": 1, "2": 0}
    blank = {"1": 0, "2": 0}
    assert utility_u(inst, jackpot, {"1", "2"}) == 1 / eps
    assert utility_u(inst, blank, {"1", "2"}) == 1


def test_utility_monotone_in_probe_set():
    rng = random.Random(11)
    for _ in range(20):
        inst = random_free_outer_instance(rng, max_elements=3)
        for realization, _ in enumerate_scenarios(inst):
            values = []
            probe: set = set()
            values.append(utility_u(inst, realization, probe))
            for e in inst.elements:
                probe.add(e)
                values.append(utility_u(inst, realization, probe))
            assert values == sorted(values)


def test_adaptive_value_on_table1():
    for eps in (Fraction(1, 10), Fraction(1, 4), Fraction(1, 3)):
        report = optimal_adaptive_value(table1(eps))
        assert report.expected_value == 2 - eps


def test_adaptive_value_single_deterministic_element():
    inst = one_uniform_instance({"a": [(5, 0, 1)]})
    assert optimal_adaptive_value(inst).expected_value == 5


def test_adaptive_value_two_fair_coins():
    inst = one_uniform_instance(
        {
            "a": [(0, 0, Fraction(1, 2)), (1, 1, Fraction(1, 2))],
            "b": [(0, 0, Fraction(1, 2)), (1, 1, Fraction(1, 2))],
        }
    )
    # independent check: expectation of the scenario-wise maximum
    expected = sum(
        prob * max(inst.dist(e)[r[e]].x for e in inst.elements)
        for r, prob in enumerate_scenarios(inst)
    )
    assert expected == Fraction(3, 4)
    assert optimal_adaptive_value(inst).expected_value == expected


def test_adaptive_policy_probes_everything_under_free_outer():
    inst = table1(Fraction(1, 2))
    report = optimal_adaptive_value(inst)
    assert report.optimal_first_probes[((), ())] is not None
    assert report.state_count == 6  # {}, {1}x2, {2}, {1,2}x2


def test_adaptive_dominates_every_fixed_probe_set():
    rng = random.Random(23)
    for _ in range(15):
        inst = random_matroid_outer_instance(rng, max_elements=3)
        adaptive = optimal_adaptive_value(inst).expected_value
        for probe_set in iter_feasible_sets(inst.outer):
            assert adaptive >= nonadaptive_value(inst, probe_set)


def test_free_outer_adaptive_equals_probe_everything():
    rng = random.Random(29)
    for _ in range(15):
        inst = random_free_outer_instance(rng, max_elements=3)
        assert optimal_adaptive_value(inst).expected_value == nonadaptive_value(
            inst, inst.elements
        )


def test_best_nonadaptive_free_outer_probes_everything():
    inst = table1(Fraction(1, 4))
    report = best_nonadaptive_set(inst)
    assert report.best_set == frozenset({"1", "2"})
    assert report.ratio_to_adaptive == 1


def test_best_nonadaptive_prefers_risky_element(risky_pair):
    ground = frozenset(risky_pair.elements)
    constrained = make_instance(
        risky_pair.elements,
        {e: list(risky_pair.dist(e)) for e in risky_pair.elements},
        UniformSystem(ground, 1),
        UniformSystem(ground, 1),
    )
    report = best_nonadaptive_set(constrained)
    assert report.best_set == frozenset({"r"})
    assert report.expected_value == Fraction(3, 2)


def test_single_feasible_probe_set_gives_ratio_one():
    inst = one_uniform_instance({"a": [(0, 1, Fraction(1, 2)), (4, 1, Fraction(1, 2))]})
    report = best_nonadaptive_set(inst)
    assert report.ratio_to_adaptive == 1


def test_nonadaptive_report_ratio_bounds():
    rng = random.Random(31)
    for _ in range(15):
        inst = random_matroid_outer_instance(rng, max_elements=3)
        report = best_nonadaptive_set(inst)
        assert 0 <= report.ratio_to_adaptive <= 1
        assert inst.outer.is_feasible(report.best_set)


def test_adaptive_state_cap():
    inst = table1(Fraction(1, 2))
    with pytest.raises(CapacityError, match="states"):
        optimal_adaptive_value(inst, state_cap=2)


def test_outer_set_cap():
    inst = table1(Fraction(1, 2))
    with pytest.raises(CapacityError, match="outer-feasible"):
        best_nonadaptive_set(inst, set_cap=2)
