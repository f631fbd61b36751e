"""Core 3-SAT data types and DIMACS io.

Conventions used throughout the package:

* variables are 1-based, ``1 <= variable <= n``
* an assignment is a length-n vector of bits, ``bits[k]`` being the value
  of variable ``k + 1``
* the dense statevector index of an assignment is big-endian in the
  variables, i.e. variable 1 is the most significant bit
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class DimacsError(ValueError):
    """Malformed DIMACS input or an invalid clause."""


@dataclass(frozen=True, order=True)
class Literal:
    """A possibly negated variable occurrence."""

    variable: int
    negated: bool = False

    def __post_init__(self) -> None:
        if self.variable < 1:
            raise ValueError(f"variable index must be >= 1, got {self.variable}")

    @staticmethod
    def from_dimacs(code: int) -> "Literal":
        if code == 0:
            raise DimacsError("literal 0 is the clause terminator, not a literal")
        return Literal(abs(code), code < 0)

    def to_dimacs(self) -> int:
        return -self.variable if self.negated else self.variable

    @property
    def false_bit(self) -> int:
        """Variable value (0/1) under which this literal evaluates false."""
        return 1 if self.negated else 0

    def is_true(self, bit: int) -> bool:
        return bool(bit) == (not self.negated)


Clause = tuple[Literal, Literal, Literal]


def clause(*codes: int) -> Clause:
    """Build a clause from signed DIMACS codes, e.g. ``clause(1, -2, 4)``."""
    lits = tuple(Literal.from_dimacs(c) for c in codes)
    _check_clause(lits)
    return lits  # type: ignore[return-value]


def _check_clause(lits: Sequence[Literal]) -> None:
    if len(lits) != 3:
        raise DimacsError(f"clause must have exactly 3 literals, got {len(lits)}")
    variables = [l.variable for l in lits]
    if len(set(variables)) != 3:
        raise DimacsError(f"clause repeats a variable: {variables}")


@dataclass(frozen=True)
class CnfInstance:
    """A 3-CNF formula over ``n`` variables.

    Clause order is preserved exactly as given; the clause-by-clause
    protocols depend on it.
    """

    n: int
    clauses: tuple[Clause, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError("variable count must be non-negative")
        for cl in self.clauses:
            _check_clause(cl)
            for lit in cl:
                if lit.variable > self.n:
                    raise DimacsError(
                        f"variable {lit.variable} out of range 1..{self.n}"
                    )

    @property
    def m(self) -> int:
        return len(self.clauses)

    @property
    def alpha(self) -> float:
        return self.m / self.n if self.n else 0.0

    def prefix(self, m: int) -> "CnfInstance":
        """The sub-instance consisting of the first ``m`` clauses."""
        return CnfInstance(self.n, self.clauses[:m])

    def permuted_clauses(self, order: Sequence[int]) -> "CnfInstance":
        return CnfInstance(self.n, tuple(self.clauses[i] for i in order))


def parse_dimacs(text: str) -> CnfInstance:
    """Parse DIMACS CNF text into an instance.

    Tokens may be split across lines; every clause must be terminated by 0
    and contain exactly three distinct variables.
    """
    n = m = None
    tokens: list[int] = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            if n is not None:
                raise DimacsError("duplicate problem line")
            parts = line.split()
            if len(parts) != 4 or parts[0] != "p" or parts[1] != "cnf":
                raise DimacsError(f"malformed problem line: {line!r}")
            try:
                n, m = int(parts[2]), int(parts[3])
            except ValueError as exc:
                raise DimacsError(f"malformed problem line: {line!r}") from exc
            continue
        if n is None:
            raise DimacsError("clause data before 'p cnf' header")
        try:
            tokens.extend(int(t) for t in line.split())
        except ValueError as exc:
            raise DimacsError(f"non-integer token in clause line: {line!r}") from exc
    if n is None or m is None:
        raise DimacsError("missing 'p cnf' header")

    clauses: list[Clause] = []
    current: list[Literal] = []
    for tok in tokens:
        if tok == 0:
            _check_clause(current)
            clauses.append(tuple(current))  # type: ignore[arg-type]
            current = []
        else:
            current.append(Literal.from_dimacs(tok))
    if current:
        raise DimacsError("unterminated clause at end of input")
    if len(clauses) != m:
        raise DimacsError(f"header declares {m} clauses, found {len(clauses)}")
    return CnfInstance(n, tuple(clauses))


def write_dimacs(instance: CnfInstance) -> str:
    """Canonical DIMACS form: header, one clause per line, trailing 0.

    ``parse_dimacs(write_dimacs(x)) == x`` holds bit-exactly.
    """
    lines = [f"p cnf {instance.n} {instance.m}"]
    for cl in instance.clauses:
        lines.append(" ".join(str(l.to_dimacs()) for l in cl) + " 0")
    return "\n".join(lines) + "\n"


def check_assignment(instance: CnfInstance, bits: Sequence[int]) -> np.ndarray:
    arr = np.asarray(bits)
    if arr.shape != (instance.n,):
        raise ValueError(f"assignment length {arr.shape} does not match n={instance.n}")
    return arr.astype(np.int8)


def clause_violated(cl: Clause, bits: Sequence[int]) -> bool:
    """A clause is violated iff all three of its literals evaluate false."""
    return all(bits[lit.variable - 1] == lit.false_bit for lit in cl)


def violations(instance: CnfInstance, bits: Sequence[int]) -> int:
    """Number of clauses the assignment violates (the classical energy)."""
    arr = check_assignment(instance, bits)
    return sum(1 for cl in instance.clauses if clause_violated(cl, arr))


def is_satisfying(instance: CnfInstance, bits: Sequence[int]) -> bool:
    return violations(instance, bits) == 0


def bits_to_index(bits: Sequence[int]) -> int:
    """Big-endian packing: variable 1 is the most significant bit."""
    idx = 0
    for b in bits:
        idx = (idx << 1) | int(b)
    return idx


def index_to_bits(index: int, n: int) -> tuple[int, ...]:
    return tuple((index >> (n - 1 - k)) & 1 for k in range(n))


def variable_bits(n: int, variable: int, indices: np.ndarray | None = None) -> np.ndarray:
    """Bit of ``variable`` for every statevector index (vectorized)."""
    if indices is None:
        indices = np.arange(1 << n, dtype=np.int64)
    return (indices >> (n - variable)) & 1


def satisfying_mask(instance: CnfInstance) -> np.ndarray:
    """Boolean mask over all 2^n assignments, True where the CNF holds."""
    size = 1 << instance.n
    mask = np.ones(size, dtype=bool)
    idx = np.arange(size, dtype=np.int64)
    for cl in instance.clauses:
        violated = np.ones(size, dtype=bool)
        for lit in cl:
            violated &= variable_bits(instance.n, lit.variable, idx) == lit.false_bit
        mask &= ~violated
    return mask


def relabel_variables(instance: CnfInstance, perm: Sequence[int]) -> CnfInstance:
    """Relabel variable v -> perm[v-1]; used for site-ordering experiments."""
    if sorted(perm) != list(range(1, instance.n + 1)):
        raise ValueError("perm must be a permutation of 1..n")
    new_clauses = tuple(
        tuple(Literal(perm[l.variable - 1], l.negated) for l in cl)
        for cl in instance.clauses
    )
    return CnfInstance(instance.n, new_clauses)  # type: ignore[arg-type]
