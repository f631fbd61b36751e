"""Boolean-algebra compression of the bipartitioned solution matrix.

The satisfying assignments of a clause prefix form a 0/1 matrix over
(left bitstrings) x (right bitstrings). A Gram-Schmidt pass under the
substituted algebra (product -> elementwise implication, sum -> OR)
yields a spanning set of Boolean rows whose size plays the role of the
rank; it is compared against the floating-point SVD rank of the same
matrix. Greedy row order makes the basis (and its size) deterministic
but not canonical: only span correctness and the shape of the size curve
are meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cnf import CnfInstance, satisfying_mask

SVD_RANK_CUTOFF = 1e-10


def build_bit_matrix(instance: CnfInstance, cut: int, prefix_m: int | None = None) -> np.ndarray:
    """0/1 matrix of satisfying assignments split at the cut, for a clause prefix."""
    if not 1 <= cut <= instance.n - 1:
        raise ValueError("cut must be an interior bond")
    sub = instance if prefix_m is None else instance.prefix(prefix_m)
    mask = satisfying_mask(sub)
    return mask.reshape(1 << cut, -1)


def _implies(a: np.ndarray, b: np.ndarray) -> bool:
    """Elementwise implication: every set bit of a is set in b."""
    return bool(np.all(b[a]))


def boolean_basis(matrix: np.ndarray) -> list[np.ndarray]:
    """Greedy Boolean Gram-Schmidt over the rows in index order.

    Each candidate row is reduced by subtracting (clearing the support of)
    every existing basis vector it still covers; a nonzero residual joins
    the basis. Every original row is then the OR of basis vectors by
    construction.
    """
    if matrix.size == 0:
        raise ValueError("matrix must be nonempty")
    basis: list[np.ndarray] = []
    for row in np.asarray(matrix, dtype=bool):
        if not row.any():
            continue
        residual = row.copy()
        for vec in basis:
            if _implies(vec, residual):
                residual &= ~vec
                if not residual.any():
                    break
        if residual.any():
            basis.append(residual)
    return basis


def boolean_dim(matrix: np.ndarray) -> int:
    return len(boolean_basis(matrix))


def spans_rows(matrix: np.ndarray, basis: list[np.ndarray]) -> bool:
    """Every nonzero row must reduce to zero against the basis in order."""
    for row in np.asarray(matrix, dtype=bool):
        residual = row.copy()
        for vec in basis:
            if residual.any() and _implies(vec, residual):
                residual &= ~vec
        if residual.any():
            return False
    return True


def svd_rank(matrix: np.ndarray, cutoff: float = SVD_RANK_CUTOFF) -> int:
    values = np.linalg.svd(np.asarray(matrix, dtype=float), compute_uv=False)
    return int((values > cutoff).sum())


@dataclass(frozen=True)
class DimensionRecord:
    m: int
    boolean_dim: int
    svd_rank: int


def compare_dimensions(instance: CnfInstance, cut: int) -> list[DimensionRecord]:
    """Boolean basis size vs SVD rank for every clause prefix (m = 0..m)."""
    out = []
    for m in range(instance.m + 1):
        matrix = build_bit_matrix(instance, cut, m)
        if matrix.any():
            out.append(DimensionRecord(m, boolean_dim(matrix), svd_rank(matrix)))
        else:
            out.append(DimensionRecord(m, 0, 0))
    return out
