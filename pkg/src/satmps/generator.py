"""Random 3-SAT instance generation.

Clauses are uniform 3-subsets of the variables with independent uniform
polarities; duplicates across clauses are allowed (independent draws).
Satisfiable and uniquely solvable instances are obtained by rejection
sampling against the exact solvers, which is unbiased at desk scale.
"""

from __future__ import annotations

import numpy as np

from .cnf import Clause, CnfInstance, Literal
from .counting import count_solutions, dpll_satisfiable

DEFAULT_BUDGET = 10_000


class GenerationBudgetError(RuntimeError):
    """Rejection sampling exhausted its attempt budget."""


def random_clause(rng: np.random.Generator, n: int) -> Clause:
    variables = np.sort(rng.choice(n, size=3, replace=False)) + 1
    negated = rng.random(3) < 0.5
    return tuple(Literal(int(v), bool(s)) for v, s in zip(variables, negated))  # type: ignore[return-value]


def random_instance(rng: np.random.Generator, n: int, m: int) -> CnfInstance:
    if n < 3 and m > 0:
        raise ValueError("need n >= 3 to draw 3-variable clauses")
    return CnfInstance(n, tuple(random_clause(rng, n) for _ in range(m)))


def generate_satisfiable(
    n: int, m: int, seed: int, budget: int = DEFAULT_BUDGET
) -> CnfInstance:
    """Uniform satisfiable instance with exactly m clauses, deterministic per seed."""
    rng = np.random.default_rng(seed)
    if m == 0:
        return CnfInstance(n)
    for _ in range(budget):
        inst = random_instance(rng, n, m)
        if dpll_satisfiable(inst):
            return inst
    raise GenerationBudgetError(
        f"no satisfiable instance in {budget} attempts at n={n}, m={m} "
        f"(alpha={m / n:.2f}); the ratio may be too deep in the UNSAT regime"
    )


def unique_solution_filter(
    n: int, m: int, seed: int, budget: int = DEFAULT_BUDGET
) -> CnfInstance:
    """Instance with exactly one satisfying assignment, deterministic per seed."""
    if m == 0 and n >= 1:
        raise GenerationBudgetError(
            f"an empty CNF over n={n} variables has 2^{n} solutions and can never be unique"
        )
    rng = np.random.default_rng(seed)
    for _ in range(budget):
        inst = random_instance(rng, n, m)
        if count_solutions(inst) == 1:
            return inst
    raise GenerationBudgetError(
        f"no uniquely solvable instance in {budget} attempts at n={n}, m={m}"
    )
