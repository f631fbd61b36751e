import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from satmps.cnf import CnfInstance, parse_dimacs
from satmps.counting import (
    CountLimitError,
    count_dpll,
    count_enumerate,
    count_solutions,
    dpll_satisfiable,
    solution_indices,
)
from satmps.generator import random_instance


def test_single_clause_counts_seven():
    inst = parse_dimacs("p cnf 3 1\n1 2 3 0")
    assert count_solutions(inst) == 7
    assert count_dpll(inst) == 7
    assert count_enumerate(inst) == 7


def test_empty_instance_counts_all():
    assert count_solutions(CnfInstance(5)) == 32
    assert count_dpll(CnfInstance(5)) == 32


def test_count_limit_raises():
    with pytest.raises(CountLimitError):
        count_solutions(CnfInstance(30))


def test_random_alpha3_matches_enumeration():
    rng = np.random.default_rng(4)
    inst = random_instance(rng, 12, 36)
    assert count_dpll(inst) == count_enumerate(inst)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 40))
def test_dual_route_agreement(seed, m):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, 9, m)
    assert count_dpll(inst) == count_enumerate(inst)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_count_invariant_under_clause_permutation(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, 8, 16)
    perm = rng.permutation(16)
    assert count_solutions(inst) == count_solutions(inst.permuted_clauses(perm))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_appending_clause_never_increases_count(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, 8, 12)
    for m in range(inst.m):
        assert count_solutions(inst.prefix(m + 1)) <= count_solutions(inst.prefix(m))


def test_dpll_satisfiable_agrees_with_count():
    rng = np.random.default_rng(5)
    for _ in range(30):
        inst = random_instance(rng, 9, int(rng.integers(20, 50)))
        assert dpll_satisfiable(inst) == (count_enumerate(inst) > 0)


def test_solution_indices_match_count():
    rng = np.random.default_rng(6)
    inst = random_instance(rng, 10, 30)
    idx = solution_indices(inst)
    assert idx.size == count_solutions(inst)
