"""satmps: random 3-SAT via imaginary-time evolved matrix product states.

Subpackages group by concern: exact combinatorics (cnf, counting,
generator), exact statevector oracles (dense), the MPS engine and the two
evolution protocols (mps, evolution), stabilizer Renyi entropies (magic),
the classical statistical models of the entanglement barrier (models),
the Boolean compression comparison (boolalg) and the experiment CLI (cli).
"""

from .cnf import CnfInstance, Literal, parse_dimacs, violations, write_dimacs
from .counting import count_solutions
from .generator import generate_satisfiable, unique_solution_filter

__all__ = [
    "CnfInstance",
    "Literal",
    "parse_dimacs",
    "write_dimacs",
    "violations",
    "count_solutions",
    "generate_satisfiable",
    "unique_solution_filter",
]

__version__ = "0.1.0"
