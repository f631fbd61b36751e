"""Exact #SAT: vectorized enumeration and DPLL-based counting.

Two independent routes are kept deliberately: ``count_enumerate`` sweeps
all 2^n assignments with numpy masks, ``count_dpll`` walks the search
tree. They must agree wherever both apply; the test suite enforces it.
"""

from __future__ import annotations

from typing import Iterator

import numpy as np

from .cnf import CnfInstance, satisfying_mask

ENUMERATION_LIMIT = 16
COUNT_LIMIT = 26


class CountLimitError(ValueError):
    """Instance too large for exact counting."""


def count_enumerate(instance: CnfInstance, limit: int = ENUMERATION_LIMIT) -> int:
    if instance.n > limit:
        raise CountLimitError(f"n={instance.n} above enumeration limit {limit}")
    return int(satisfying_mask(instance).sum())


def _to_int_clauses(instance: CnfInstance) -> list[tuple[int, ...]]:
    return [tuple(l.to_dimacs() for l in cl) for cl in instance.clauses]


def _propagate_units(
    clauses: list[tuple[int, ...]], assignment: dict[int, bool]
) -> list[tuple[int, ...]] | None:
    """Assign all unit literals; returns simplified clauses or None on conflict."""
    while True:
        unit = None
        for cl in clauses:
            if len(cl) == 0:
                return None
            if len(cl) == 1:
                unit = cl[0]
                break
        if unit is None:
            return clauses
        assignment[abs(unit)] = unit > 0
        clauses = _assign(clauses, unit)
        if clauses is None:
            return None


def _assign(
    clauses: list[tuple[int, ...]], lit: int
) -> list[tuple[int, ...]] | None:
    out = []
    for cl in clauses:
        if lit in cl:
            continue
        if -lit in cl:
            reduced = tuple(l for l in cl if l != -lit)
            if not reduced:
                return None
            out.append(reduced)
        else:
            out.append(cl)
    return out


def dpll_satisfiable(instance: CnfInstance) -> bool:
    """Decision DPLL: unit propagation, pure-literal elimination,
    branching on the lowest-index unassigned variable."""

    def solve(clauses: list[tuple[int, ...]]) -> bool:
        clauses = _propagate_units(clauses, {})
        if clauses is None:
            return False
        if not clauses:
            return True
        # pure literal elimination (sound for satisfiability, not counting)
        lits = {l for cl in clauses for l in cl}
        for l in sorted(lits, key=abs):
            if -l not in lits:
                reduced = _assign(clauses, l)
                return solve(reduced) if reduced is not None else False
        branch = min(abs(l) for l in lits)
        for lit in (branch, -branch):
            reduced = _assign(clauses, lit)
            if reduced is not None and solve(reduced):
                return True
        return False

    return solve(_to_int_clauses(instance))


def count_dpll(instance: CnfInstance, limit: int = COUNT_LIMIT) -> int:
    """Counting DPLL. Unit propagation only: pure-literal elimination does
    not preserve model counts. Variables absent from all remaining clauses
    contribute a factor 2 each."""
    if instance.n > limit:
        raise CountLimitError(f"n={instance.n} above exact-count limit {limit}")

    def count(clauses: list[tuple[int, ...]], free: int) -> int:
        assignment: dict[int, bool] = {}
        clauses = _propagate_units(clauses, assignment)
        if clauses is None:
            return 0
        free -= len(assignment)
        if not clauses:
            return 1 << free
        remaining = {abs(l) for cl in clauses for l in cl}
        branch = min(remaining)
        total = 0
        for lit in (branch, -branch):
            reduced = _assign(clauses, lit)
            if reduced is not None:
                total += count(reduced, free - 1)
        return total

    constrained = {l.variable for cl in instance.clauses for l in cl}
    n_free = instance.n - len(constrained)
    return count(_to_int_clauses(instance), len(constrained)) << n_free


def count_solutions(instance: CnfInstance, method: str = "auto",
                    limit: int = COUNT_LIMIT) -> int:
    """Exact number of satisfying assignments.

    method: "auto" picks enumeration for small n and DPLL otherwise;
    "enumerate" and "dpll" force one route (used for cross-checks).
    """
    if instance.n > limit:
        raise CountLimitError(f"n={instance.n} above exact-count limit {limit}")
    if method == "enumerate":
        return count_enumerate(instance, limit=min(limit, 22))
    if method == "dpll":
        return count_dpll(instance, limit=limit)
    if method != "auto":
        raise ValueError(f"unknown method {method!r}")
    if instance.n <= 14:
        return count_enumerate(instance, limit=14)
    return count_dpll(instance, limit=limit)


def solution_indices(instance: CnfInstance, cap: int | None = None) -> np.ndarray:
    """Statevector indices of all satisfying assignments (n <= 22).

    With ``cap`` set, raises if the count exceeds it; callers use this to
    bound per-record work in evolution traces.
    """
    if instance.n > 22:
        raise CountLimitError("solution enumeration limited to n <= 22")
    idx = np.flatnonzero(satisfying_mask(instance))
    if cap is not None and idx.size > cap:
        raise CountLimitError(f"{idx.size} solutions exceed cap {cap}")
    return idx
