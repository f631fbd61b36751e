import math

import numpy as np
import pytest

from satmps.cnf import CnfInstance
from satmps.counting import count_enumerate
from satmps.dense import (
    build_energy_diagonal,
    entanglement_entropy,
    ite_evolve,
    schmidt,
    solution_weight,
)
from satmps.evolution import (
    EvolutionTrace,
    IteSchedule,
    count_estimate,
    flat_run,
    ite_run,
    verify_certificate,
)
from satmps.generator import generate_satisfiable, random_instance
from satmps.mps import TruncationPolicy, product_plus_state

UNTRUNCATED = TruncationPolicy.untruncated()


def test_ite_empty_instance():
    trace = ite_run(CnfInstance(6), IteSchedule(dtau=0.1, tau_max=1.0))
    assert np.allclose(trace.bond_entropy, 0.0)
    assert np.allclose(trace.solution_weight, 1.0)


def test_ite_matches_dense_oracle_n10():
    inst = generate_satisfiable(10, 42, seed=2)
    trace = ite_run(
        inst,
        IteSchedule(dtau=0.05, tau_max=3.0),
        TruncationPolicy.untruncated(renormalize=True),
    )
    diag = build_energy_diagonal(inst)
    for tau, s_mps, w_mps in zip(
        trace.grid, trace.half_chain_entropy, trace.solution_weight
    ):
        state = ite_evolve(diag, tau)
        assert s_mps == pytest.approx(
            entanglement_entropy(schmidt(state, 5)), abs=1e-3
        )
        if not math.isnan(w_mps):
            assert w_mps == pytest.approx(solution_weight(state, inst), abs=1e-6)


def test_linearized_gate_first_order_scaling():
    inst = generate_satisfiable(8, 30, seed=3)
    diag = build_energy_diagonal(inst)
    exact = entanglement_entropy(schmidt(ite_evolve(diag, 2.0), 4))
    errors = {}
    for dtau in (0.1, 0.05):
        trace = ite_run(
            inst,
            IteSchedule(
                dtau=dtau,
                tau_max=2.0,
                record_every=int(round(2.0 / dtau)),
                gate_mode="linearized",
            ),
            TruncationPolicy.untruncated(renormalize=True),
        )
        errors[dtau] = abs(trace.half_chain_entropy[-1] - exact)
    ratio = errors[0.1] / errors[0.05]
    assert 1.5 < ratio < 3.0


def test_ite_bump_at_critical_alpha():
    inst = generate_satisfiable(10, 42, seed=4)
    trace = ite_run(inst, IteSchedule(dtau=0.05, tau_max=8.0))
    s = trace.half_chain_entropy
    assert trace.bump_height > max(s[0], s[-1]) + 0.1
    assert trace.bump_position > 0


def test_flat_run_counts_exactly():
    inst = generate_satisfiable(12, 40, seed=5)
    trace, final = flat_run(inst, UNTRUNCATED)
    estimate = count_estimate(final)
    exact = count_enumerate(inst)
    assert abs(estimate - exact) < 0.5
    assert round(estimate) == exact


def test_flat_run_single_clause():
    inst = generate_satisfiable(6, 1, seed=6)
    trace, final = flat_run(inst, UNTRUNCATED)
    assert len(trace.grid) == 1
    assert trace.norm_sq[0] == pytest.approx(7 / 8)


def test_flat_run_prefix_counts():
    inst = generate_satisfiable(10, 25, seed=7)
    trace, _ = flat_run(inst, UNTRUNCATED)
    for k, nrm in zip(trace.grid, trace.norm_sq):
        exact = count_enumerate(inst.prefix(int(k)))
        assert nrm * (1 << 10) == pytest.approx(exact, abs=1e-6)


def test_flat_run_unsat_goes_dead():
    rng = np.random.default_rng(8)
    inst = None
    for seed in range(40):
        cand = random_instance(np.random.default_rng(seed), 8, 80)
        if count_enumerate(cand) == 0:
            inst = cand
            break
    assert inst is not None
    trace, final = flat_run(inst, UNTRUNCATED)
    assert trace.norm_sq[-1] == 0.0
    assert final.norm_sq() == 0.0
    assert count_estimate(final) == 0.0


def test_flat_run_rejects_renormalizing_policy():
    with pytest.raises(ValueError):
        flat_run(CnfInstance(4), TruncationPolicy(renormalize=True))


def test_verify_certificate_accepts_untruncated():
    inst = generate_satisfiable(10, 30, seed=9)
    _, final = flat_run(inst, UNTRUNCATED)
    result = verify_certificate(final, inst)
    assert result["invariant"] is True
    assert round(result["count"]) == count_enumerate(inst)


def test_verify_certificate_rejects_uniform_state():
    inst = generate_satisfiable(8, 20, seed=10)
    result = verify_certificate(product_plus_state(8), inst)
    assert result["invariant"] is False


def test_verify_certificate_flags_truncated_state():
    inst = generate_satisfiable(12, 50, seed=11)
    trace, final = flat_run(inst, TruncationPolicy(chi=2, eps=1e-12, renormalize=False))
    result = verify_certificate(final, inst)
    exact = count_enumerate(inst)
    assert (result["invariant"] is False) or abs(result["count"] - exact) >= 0.5


def test_verify_certificate_size_mismatch():
    with pytest.raises(ValueError):
        verify_certificate(product_plus_state(5), CnfInstance(6))


def test_trace_grid_validation():
    with pytest.raises(ValueError):
        EvolutionTrace(
            kind="ite",
            cut=1,
            grid=np.array([0.0, 0.0]),
            bond_entropy=np.zeros((2, 1)),
        )


def test_snapshot_certificate_round_trip(tmp_path):
    inst = generate_satisfiable(9, 27, seed=12)
    _, final = flat_run(inst, UNTRUNCATED)
    path = tmp_path / "final.mps"
    final.save(path)
    from satmps.mps import Mps

    loaded = Mps.load(path)
    result = verify_certificate(loaded, inst)
    assert result["invariant"] is True
    assert round(result["count"]) == count_enumerate(inst)
