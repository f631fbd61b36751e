"""The two evolution protocols on MPS and their diagnostic traces.

``ite_run`` filters the ground state with per-clause imaginary-time gates
(the splitting is exact because all clause terms are diagonal; see the
module notes in mps.py), ``flat_run`` applies the bare satisfiability
projectors so that the squared norm counts the surviving assignments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cnf import CnfInstance
from .counting import CountLimitError, solution_indices
from .mps import (
    ClauseOperator,
    Mps,
    NormUnderflowError,
    TruncationPolicy,
    apply_clause,
    clause_gate,
    clause_to_mpo,
    mpo_expectation,
    product_plus_state,
)

SOLUTION_LIST_CAP = 1024


@dataclass(frozen=True)
class IteSchedule:
    """Time grid for the imaginary-time run.

    gate_mode "exact" uses exp(-dtau h) per clause (no splitting error);
    "linearized" uses the first-order gate 1 - dtau*h, whose global error
    is O(dtau) and is used to demonstrate the convergence order.
    """

    dtau: float = 0.05
    tau_max: float = 12.0
    record_every: int = 1
    gate_mode: str = "exact"

    def __post_init__(self) -> None:
        if self.dtau <= 0:
            raise ValueError("dtau must be positive")
        if self.gate_mode not in ("exact", "linearized"):
            raise ValueError(f"unknown gate_mode {self.gate_mode!r}")

    @property
    def steps(self) -> int:
        return int(round(self.tau_max / self.dtau))


@dataclass
class EvolutionTrace:
    """Per-record diagnostics of an evolution run.

    grid holds tau for the imaginary-time protocol and the number of
    applied clauses for the flat protocol. solution_weight entries are
    NaN where the weight was not evaluated.
    """

    kind: str
    cut: int
    grid: np.ndarray
    bond_entropy: np.ndarray          # (records, n-1)
    half_chain_values: list[np.ndarray] = field(repr=False, default_factory=list)
    norm_sq: np.ndarray = field(default_factory=lambda: np.empty(0))
    solution_weight: np.ndarray = field(default_factory=lambda: np.empty(0))
    max_bond: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))
    discarded: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self) -> None:
        if np.any(np.diff(self.grid) <= 0):
            raise ValueError("record grid must be strictly increasing")
        if np.any(self.bond_entropy < -1e-12):
            raise ValueError("entropies must be non-negative")

    @property
    def half_chain_entropy(self) -> np.ndarray:
        return self.bond_entropy[:, self.cut - 1]

    @property
    def bump_height(self) -> float:
        """Maximum of the half-chain entropy over the run."""
        return float(self.half_chain_entropy.max())

    @property
    def bump_position(self) -> float:
        """Grid point at which the half-chain entropy peaks."""
        return float(self.grid[int(self.half_chain_entropy.argmax())])


class _WeightEvaluator:
    """Per-record solution weight at bounded cost.

    Small solution manifolds (up to the cap) are enumerated once and the
    weight is a batched amplitude sum; the empty instance is analytic.
    Larger manifolds are skipped (NaN) except where the caller forces
    evaluation at the final record via a dense-side count.
    """

    def __init__(self, instance: CnfInstance, cap: int = SOLUTION_LIST_CAP):
        self.instance = instance
        self.indices: np.ndarray | None = None
        self.trivial = instance.m == 0
        if not self.trivial and instance.n <= 22:
            try:
                self.indices = solution_indices(instance, cap=cap)
            except CountLimitError:
                self.indices = None

    def weight(self, mps: Mps) -> float:
        if self.trivial:
            return 1.0
        if self.indices is None:
            return math.nan
        if self.indices.size == 0:
            return 0.0
        amps = mps.amplitudes(self.indices, include_norm=False)
        return float((amps**2).sum())


def _record(mps: Mps, trace_rows: dict, cut: int, weight: float) -> None:
    ent = mps.bond_entropies()
    trace_rows["bond_entropy"].append(ent)
    trace_rows["half_chain"].append(mps.schmidt_values(cut))
    trace_rows["norm_sq"].append(mps.norm_sq())
    trace_rows["weight"].append(weight)
    trace_rows["max_bond"].append(mps.max_bond())
    trace_rows["discarded"].append(mps.last_discarded)


def ite_steps(
    instance: CnfInstance,
    schedule: IteSchedule,
    policy: TruncationPolicy | None = None,
):
    """Generator over (tau, mps) at record points, tau=0 included.

    The yielded Mps is live state: copy before mutating.
    """
    policy = policy or TruncationPolicy()
    mps = product_plus_state(instance.n)
    if schedule.gate_mode == "exact":
        gates = [clause_to_mpo(cl, schedule.dtau) for cl in instance.clauses]
    else:
        gates = [clause_gate(cl, 1.0 - schedule.dtau) for cl in instance.clauses]
    yield 0.0, mps
    for step in range(1, schedule.steps + 1):
        for gate in gates:
            apply_clause(mps, gate, policy)
        if step % schedule.record_every == 0 or step == schedule.steps:
            yield step * schedule.dtau, mps


def ite_run(
    instance: CnfInstance,
    schedule: IteSchedule | None = None,
    policy: TruncationPolicy | None = None,
    cut: int | None = None,
) -> EvolutionTrace:
    """Imaginary-time evolution |+..+> -> ground manifold with diagnostics."""
    schedule = schedule or IteSchedule()
    cut = instance.n // 2 if cut is None else cut
    evaluator = _WeightEvaluator(instance)
    rows = {k: [] for k in ("bond_entropy", "half_chain", "norm_sq", "weight", "max_bond", "discarded")}
    grid = []
    for tau, mps in ite_steps(instance, schedule, policy):
        grid.append(tau)
        _record(mps, rows, cut, evaluator.weight(mps))
    return EvolutionTrace(
        kind="ite",
        cut=cut,
        grid=np.array(grid),
        bond_entropy=np.array(rows["bond_entropy"]),
        half_chain_values=rows["half_chain"],
        norm_sq=np.array(rows["norm_sq"]),
        solution_weight=np.array(rows["weight"]),
        max_bond=np.array(rows["max_bond"], dtype=int),
        discarded=np.array(rows["discarded"]),
    )


def flat_run(
    instance: CnfInstance,
    policy: TruncationPolicy | None = None,
    cut: int | None = None,
) -> tuple[EvolutionTrace, Mps]:
    """Apply clause projectors in instance order, tracking the counting norm.

    The record index is the number of applied clauses (1..m). On an UNSAT
    prefix the state is annihilated; the remaining records carry zero norm
    and empty spectra. Returns the trace and the final state.
    """
    policy = policy or TruncationPolicy(renormalize=False)
    if policy.renormalize:
        raise ValueError("flat protocol needs renormalize=False: the norm is the count")
    n = instance.n
    cut = n // 2 if cut is None else cut
    mps = product_plus_state(n)
    gates = [clause_to_mpo(cl, math.inf) for cl in instance.clauses]
    rows = {k: [] for k in ("bond_entropy", "half_chain", "norm_sq", "weight", "max_bond", "discarded")}
    dead = False
    for gate in gates:
        if not dead:
            try:
                apply_clause(mps, gate, policy)
            except NormUnderflowError:
                dead = True
        if dead:
            rows["bond_entropy"].append(np.zeros(n - 1))
            rows["half_chain"].append(np.empty(0))
            rows["norm_sq"].append(0.0)
            rows["weight"].append(0.0)
            rows["max_bond"].append(1)
            rows["discarded"].append(0.0)
        else:
            _record(mps, rows, cut, math.nan)
    grid = np.arange(1, instance.m + 1, dtype=float)
    trace = EvolutionTrace(
        kind="flat",
        cut=cut,
        grid=grid,
        bond_entropy=(
            np.array(rows["bond_entropy"]) if rows["bond_entropy"] else np.empty((0, n - 1))
        ),
        half_chain_values=rows["half_chain"],
        norm_sq=np.array(rows["norm_sq"]),
        solution_weight=np.array(rows["weight"]),
        max_bond=np.array(rows["max_bond"], dtype=int),
        discarded=np.array(rows["discarded"]),
    )
    return trace, mps


def count_estimate(mps: Mps) -> float:
    """2^n times the squared counting norm of a flat-protocol state."""
    return float(2.0**mps.n * mps.norm_sq())


def verify_certificate(
    mps: Mps, instance: CnfInstance, tolerance: float = 1e-8
) -> dict:
    """Check an MPS as a #SAT certificate.

    invariant: every clause projector leaves the state fixed within
    tolerance (fidelity <psi|P|psi>/<psi|psi> >= 1 - tolerance);
    count: 2^n times the stored squared norm.
    """
    if instance.n != mps.n:
        raise ValueError(f"instance has n={instance.n} but MPS has n={mps.n}")
    invariant = True
    worst = 1.0
    for cl in instance.clauses:
        projector = clause_to_mpo(cl, math.inf)
        fid = mpo_expectation(mps, projector)
        worst = min(worst, fid)
        if fid < 1.0 - tolerance:
            invariant = False
    return {"invariant": invariant, "count": count_estimate(mps), "min_fidelity": worst}
