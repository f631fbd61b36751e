import pytest

from satmps.cnf import CnfInstance, write_dimacs
from satmps.counting import count_solutions
from satmps.generator import (
    GenerationBudgetError,
    generate_satisfiable,
    unique_solution_filter,
)


def test_empty_request_is_trivially_satisfiable():
    inst = generate_satisfiable(3, 0, seed=0)
    assert inst == CnfInstance(3)
    assert count_solutions(inst) == 8


def test_paper_scale_instance_is_satisfiable():
    inst = generate_satisfiable(18, 76, seed=7)
    assert inst.n == 18 and inst.m == 76
    assert count_solutions(inst) >= 1


def test_alpha_4_2_instances_satisfiable():
    for seed in range(5):
        inst = generate_satisfiable(10, 42, seed=seed)
        assert count_solutions(inst, method="enumerate") >= 1


def test_generation_deterministic_per_seed():
    a = generate_satisfiable(12, 50, seed=123)
    b = generate_satisfiable(12, 50, seed=123)
    assert write_dimacs(a) == write_dimacs(b)
    c = generate_satisfiable(12, 50, seed=124)
    assert write_dimacs(a) != write_dimacs(c)


def test_budget_exhaustion_deep_unsat():
    with pytest.raises(GenerationBudgetError):
        generate_satisfiable(8, 120, seed=0, budget=30)


def test_unique_solution_examples():
    inst = unique_solution_filter(15, round(4.27 * 15), seed=3)
    assert count_solutions(inst) == 1

    inst2 = unique_solution_filter(10, 43, seed=5)
    assert count_solutions(inst2, method="enumerate") == 1


def test_unique_rejects_empty_cnf():
    with pytest.raises(GenerationBudgetError):
        unique_solution_filter(3, 0, seed=0)
