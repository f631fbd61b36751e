"""Exact statevector oracle for both evolution protocols.

Amplitudes are stored as a real vector of length 2^n indexed big-endian in
the variables (variable 1 = most significant bit), so a reshape to
(2^cut, 2^(n-cut)) exposes the left/right bipartition directly. Both
protocols keep amplitudes real and non-negative, which the whole package
relies on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cnf import CnfInstance, satisfying_mask, variable_bits

DENSE_LIMIT = 14
SCHMIDT_TRIM = 1e-14


class DenseLimitError(ValueError):
    """Instance too large for the dense oracle."""


def _check_size(n: int, limit: int) -> None:
    if n > limit:
        raise DenseLimitError(f"n={n} exceeds dense limit {limit}")


def build_energy_diagonal(instance: CnfInstance, limit: int = DENSE_LIMIT) -> np.ndarray:
    """Per-basis-state violation counts: entry[x] = number of violated clauses."""
    _check_size(instance.n, limit)
    size = 1 << instance.n
    idx = np.arange(size, dtype=np.int64)
    diag = np.zeros(size, dtype=np.int32)
    for cl in instance.clauses:
        violated = np.ones(size, dtype=bool)
        for lit in cl:
            violated &= variable_bits(instance.n, lit.variable, idx) == lit.false_bit
        diag += violated
    return diag


def uniform_state(n: int) -> np.ndarray:
    return np.full(1 << n, 2.0 ** (-n / 2))


def ite_evolve(diag: np.ndarray, tau: float) -> np.ndarray:
    """Normalized amplitudes proportional to exp(-tau * violations).

    tau = inf projects onto the zero-violation subspace and fails for
    unsatisfiable instances.
    """
    if tau < 0:
        raise ValueError("tau must be non-negative")
    if np.isinf(tau):
        mask = diag == 0
        k = int(mask.sum())
        if k == 0:
            raise ValueError("tau=inf projector is empty: instance is unsatisfiable")
        state = np.zeros(diag.shape[0])
        state[mask] = 1.0 / np.sqrt(k)
        return state
    shifted = diag - diag.min()
    state = np.exp(-tau * shifted.astype(float))
    return state / np.linalg.norm(state)


def solution_weight(state: np.ndarray, instance: CnfInstance) -> float:
    """Total squared amplitude on satisfying assignments."""
    mask = satisfying_mask(instance)
    return float((state[mask] ** 2).sum())


@dataclass(frozen=True)
class SchmidtSpectrum:
    """Descending singular values of the state reshaped at a bond."""

    cut: int
    values: np.ndarray

    def __post_init__(self) -> None:
        if np.any(np.diff(self.values) > 1e-12):
            raise ValueError("Schmidt values must be descending")


def schmidt(state: np.ndarray, cut: int, trim: float = SCHMIDT_TRIM) -> SchmidtSpectrum:
    """Schmidt spectrum across sites 1..cut | cut+1..n."""
    n = int(round(np.log2(state.shape[0])))
    if not 1 <= cut <= n - 1:
        raise ValueError(f"cut must be in 1..{n - 1}")
    matrix = state.reshape(1 << cut, -1)
    values = np.linalg.svd(matrix, compute_uv=False)
    return SchmidtSpectrum(cut, values[values > trim])


def entanglement_entropy(spectrum: SchmidtSpectrum | np.ndarray) -> float:
    """Von Neumann entropy -sum(p ln p) of the squared Schmidt values."""
    values = spectrum.values if isinstance(spectrum, SchmidtSpectrum) else np.asarray(spectrum)
    if values.size == 0:
        return 0.0
    p = values**2
    p = p[p > 0]
    return max(0.0, float(-(p * np.log(p)).sum()))


@dataclass
class DenseFlatTrace:
    """Per-clause record of the dense flat-spectrum protocol."""

    cut: int
    spectra: list[SchmidtSpectrum]
    norm_sq: list[float]

    def __len__(self) -> int:
        return len(self.norm_sq)


def flat_protocol_dense(
    instance: CnfInstance, cut: int | None = None, limit: int = DENSE_LIMIT
) -> tuple[DenseFlatTrace, np.ndarray]:
    """Apply the clause satisfiability projectors in order, never renormalizing.

    Records the Schmidt spectrum of the normalized state and the raw
    squared norm after each clause; the final squared norm times 2^n is
    the exact solution count. Returns the trace and the final state.
    """
    _check_size(instance.n, limit)
    n = instance.n
    cut = n // 2 if cut is None else cut
    size = 1 << n
    idx = np.arange(size, dtype=np.int64)
    state = uniform_state(n)
    spectra: list[SchmidtSpectrum] = []
    norms: list[float] = []
    for cl in instance.clauses:
        violated = np.ones(size, dtype=bool)
        for lit in cl:
            violated &= variable_bits(n, lit.variable, idx) == lit.false_bit
        state[violated] = 0.0
        nrm_sq = float((state**2).sum())
        norms.append(nrm_sq)
        if nrm_sq > 0:
            spectra.append(schmidt(state / np.sqrt(nrm_sq), cut))
        else:
            spectra.append(SchmidtSpectrum(cut, np.empty(0)))
    return DenseFlatTrace(cut, spectra, norms), state


_PAULI_CODES = {"I": 0, "X": 1, "Y": 2, "Z": 3}


def pauli_expectation(state: np.ndarray, pauli: str) -> float:
    """<psi|P|psi> for a real state and a Pauli string over I, X, Y, Z.

    Strings with an odd number of Y factors have vanishing expectation on
    real states and return 0 immediately; even-Y strings stay real with an
    overall sign (-1)^(num_Y/2).
    """
    n = int(round(np.log2(state.shape[0])))
    if len(pauli) != n:
        raise ValueError(f"Pauli string length {len(pauli)} does not match n={n}")
    if any(c not in _PAULI_CODES for c in pauli):
        raise ValueError(f"invalid Pauli string {pauli!r}")
    num_y = pauli.count("Y")
    if num_y % 2 == 1:
        return 0.0
    flip = 0
    phase_sites = []
    for site, c in enumerate(pauli, start=1):
        if c in ("X", "Y"):
            flip |= 1 << (n - site)
        if c in ("Z", "Y"):
            phase_sites.append(site)
    idx = np.arange(1 << n, dtype=np.int64)
    parity = np.zeros(1 << n, dtype=np.int64)
    for site in phase_sites:
        parity ^= variable_bits(n, site, idx)
    sign = np.where(parity == 1, -1.0, 1.0)
    value = float(np.dot(state[idx ^ flip] * sign, state))
    return value * (-1.0) ** (num_y // 2)
