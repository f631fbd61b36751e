import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from satmps.cnf import CnfInstance, index_to_bits, parse_dimacs, violations
from satmps.counting import count_enumerate
from satmps.dense import (
    DenseLimitError,
    SchmidtSpectrum,
    build_energy_diagonal,
    entanglement_entropy,
    flat_protocol_dense,
    ite_evolve,
    pauli_expectation,
    schmidt,
    solution_weight,
    uniform_state,
)
from satmps.generator import random_instance

SINGLE_CLAUSE = parse_dimacs("p cnf 3 1\n1 2 3 0")

# Schmidt weights of the uniform state on 7 of 8 basis states across the
# first bond: squared values (7 +- sqrt(37)) / 14, computed by hand from
# the 2x4 amplitude matrix.
SEVEN_STATE_LARGE = math.sqrt((7 + math.sqrt(37)) / 14)
SEVEN_STATE_SMALL = math.sqrt((7 - math.sqrt(37)) / 14)


def test_energy_diagonal_empty():
    diag = build_energy_diagonal(CnfInstance(4))
    assert diag.shape == (16,)
    assert not diag.any()


def test_energy_diagonal_single_clause():
    diag = build_energy_diagonal(SINGLE_CLAUSE)
    expected = np.zeros(8, dtype=np.int32)
    expected[0] = 1  # only 000 violates (x1 or x2 or x3)
    assert (diag == expected).all()


def test_energy_diagonal_cross_module():
    rng = np.random.default_rng(10)
    inst = random_instance(rng, 10, 40)
    diag = build_energy_diagonal(inst)
    for idx in rng.integers(0, 1 << 10, size=100):
        assert diag[idx] == violations(inst, index_to_bits(int(idx), 10))


def test_energy_diagonal_size_limit():
    with pytest.raises(DenseLimitError):
        build_energy_diagonal(CnfInstance(15))


def test_ite_tau_zero_uniform():
    diag = build_energy_diagonal(SINGLE_CLAUSE)
    state = ite_evolve(diag, 0.0)
    assert np.allclose(state, 2 ** (-1.5))


def test_ite_tau_inf_projects():
    diag = build_energy_diagonal(SINGLE_CLAUSE)
    state = ite_evolve(diag, np.inf)
    assert state[0] == 0.0
    assert np.allclose(state[1:], 1 / np.sqrt(7))


def test_ite_tau_inf_unsat_raises():
    diag = np.array([1, 2, 1, 3])
    with pytest.raises(ValueError):
        ite_evolve(diag, np.inf)


def test_ite_solution_weight_matches_direct_summation():
    # oracle: evaluate exp(-2 tau E) sums directly from sat-core violations
    rng = np.random.default_rng(11)
    inst = random_instance(rng, 12, 36)
    tau = 2.0
    weights = np.array(
        [math.exp(-2 * tau * violations(inst, index_to_bits(i, 12))) for i in range(1 << 12)]
    )
    expected = weights[build_energy_diagonal(inst) == 0].sum() / weights.sum()
    state = ite_evolve(build_energy_diagonal(inst), tau)
    assert solution_weight(state, inst) == pytest.approx(expected, abs=1e-12)


def test_ite_semigroup_pointwise():
    rng = np.random.default_rng(12)
    inst = random_instance(rng, 9, 30)
    diag = build_energy_diagonal(inst)
    s1 = ite_evolve(diag, 0.7)
    s2 = ite_evolve(diag, 1.9)
    evolved = s1 * np.exp(-1.2 * diag)
    evolved /= np.linalg.norm(evolved)
    assert np.allclose(evolved, s2, atol=1e-12)


def test_ite_weight_monotone_in_tau():
    rng = np.random.default_rng(13)
    inst = random_instance(rng, 10, 42)
    diag = build_energy_diagonal(inst)
    weights = [solution_weight(ite_evolve(diag, t), inst) for t in np.linspace(0, 6, 25)]
    assert all(b >= a - 1e-12 for a, b in zip(weights, weights[1:]))


def test_ite_large_tau_weight_near_one():
    rng = np.random.default_rng(14)
    inst = random_instance(rng, 10, 30)
    diag = build_energy_diagonal(inst)
    if (diag == 0).any():
        state = ite_evolve(diag, 12.0)
        assert solution_weight(state, inst) >= 0.99


def test_solution_weight_trivia():
    assert solution_weight(uniform_state(4), CnfInstance(4)) == pytest.approx(1.0)
    assert solution_weight(uniform_state(3), SINGLE_CLAUSE) == pytest.approx(7 / 8)


def test_schmidt_product_state_rank_one():
    spec = schmidt(uniform_state(6), 3)
    assert spec.values.shape == (1,)
    assert spec.values[0] == pytest.approx(1.0)
    assert entanglement_entropy(spec) == pytest.approx(0.0, abs=1e-12)


def test_schmidt_seven_state_values():
    state = np.zeros(8)
    state[1:] = 1 / np.sqrt(7)
    spec = schmidt(state, 1)
    assert spec.values == pytest.approx([SEVEN_STATE_LARGE, SEVEN_STATE_SMALL])
    # matches the closed-form pair quoted to four digits
    assert spec.values[1] * np.sqrt(7) == pytest.approx(0.6772, abs=5e-4)
    assert spec.values[0] * np.sqrt(7) == pytest.approx(2.5576, abs=5e-4)


def test_seven_state_entropy_value():
    state = np.zeros(8)
    state[1:] = 1 / np.sqrt(7)
    expected = -sum(
        p * math.log(p)
        for p in ((7 + math.sqrt(37)) / 14, (7 - math.sqrt(37)) / 14)
    )
    assert entanglement_entropy(schmidt(state, 1)) == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(0.2419, abs=1e-4)


def test_schmidt_normalization_and_side_symmetry():
    # both sides of any cut share the same spectrum for a pure state
    rng = np.random.default_rng(15)
    state = rng.random(1 << 8)
    state /= np.linalg.norm(state)
    for cut in (1, 3, 4, 7):
        spec = schmidt(state, cut)
        assert (spec.values**2).sum() == pytest.approx(1.0, abs=1e-10)
        transposed = np.linalg.svd(
            state.reshape(1 << cut, -1).T, compute_uv=False
        )
        assert entanglement_entropy(spec) == pytest.approx(
            entanglement_entropy(transposed[transposed > 1e-14]), abs=1e-10
        )


def test_entropy_two_equal_values():
    assert entanglement_entropy(np.array([1 / np.sqrt(2)] * 2)) == pytest.approx(
        math.log(2)
    )


def test_entropy_bounded_by_cut():
    rng = np.random.default_rng(16)
    state = rng.random(1 << 9)
    state /= np.linalg.norm(state)
    for cut in range(1, 9):
        s = entanglement_entropy(schmidt(state, cut))
        assert 0 <= s <= min(cut, 9 - cut) * math.log(2) + 1e-9


def test_flat_dense_empty_and_single():
    trace, state = flat_protocol_dense(CnfInstance(4))
    assert len(trace) == 0
    assert (state**2).sum() == pytest.approx(1.0)

    trace, state = flat_protocol_dense(SINGLE_CLAUSE)
    assert len(trace) == 1
    assert trace.norm_sq[0] == pytest.approx(7 / 8)


def test_flat_dense_counts_solutions():
    rng = np.random.default_rng(17)
    inst = random_instance(rng, 12, 30)
    trace, _ = flat_protocol_dense(inst)
    count = trace.norm_sq[-1] * (1 << 12)
    assert count == pytest.approx(count_enumerate(inst), abs=1e-6)


def test_flat_dense_prefix_counts_and_monotone_norm():
    rng = np.random.default_rng(18)
    inst = random_instance(rng, 10, 25)
    trace, _ = flat_protocol_dense(inst)
    for m, nrm in enumerate(trace.norm_sq, start=1):
        assert nrm * (1 << 10) == pytest.approx(count_enumerate(inst.prefix(m)), abs=1e-6)
    assert all(b <= a + 1e-15 for a, b in zip(trace.norm_sq, trace.norm_sq[1:]))


def test_flat_dense_clause_order_invariance():
    rng = np.random.default_rng(19)
    inst = random_instance(rng, 9, 20)
    perm = rng.permutation(20)
    _, state_a = flat_protocol_dense(inst)
    _, state_b = flat_protocol_dense(inst.permuted_clauses(perm))
    assert np.max(np.abs(state_a - state_b)) < 1e-12


def test_flat_dense_projector_idempotent():
    inst = CnfInstance(3, (SINGLE_CLAUSE.clauses[0], SINGLE_CLAUSE.clauses[0]))
    trace, state = flat_protocol_dense(inst)
    assert trace.norm_sq[0] == pytest.approx(trace.norm_sq[1])
    _, once = flat_protocol_dense(SINGLE_CLAUSE)
    assert np.allclose(state, once)


def test_flat_dense_unsat_empties_spectra():
    # x1 alone forced both ways through 8 clauses over 3 vars: contradiction
    text = "p cnf 3 8\n" + "\n".join(
        f"{a} {b} {c} 0"
        for a in (1, -1)
        for b in (2, -2)
        for c in (3, -3)
    )
    inst = parse_dimacs(text)
    trace, state = flat_protocol_dense(inst)
    assert trace.norm_sq[-1] == 0.0
    assert trace.spectra[-1].values.size == 0
    assert not state.any()


def test_pauli_expectation_plus_state():
    state = uniform_state(4)
    assert pauli_expectation(state, "XXXX") == pytest.approx(1.0)
    assert pauli_expectation(state, "IXXI") == pytest.approx(1.0)
    assert pauli_expectation(state, "ZXXI") == pytest.approx(0.0)
    assert pauli_expectation(state, "YXXI") == pytest.approx(0.0)


def test_pauli_expectation_matches_matrix_oracle():
    # oracle: explicit 8x8 Pauli matrices
    rng = np.random.default_rng(20)
    state = rng.random(8)
    state /= np.linalg.norm(state)
    mats = {
        "I": np.eye(2),
        "X": np.array([[0, 1], [1, 0]], dtype=complex),
        "Y": np.array([[0, -1j], [1j, 0]]),
        "Z": np.diag([1.0, -1.0]).astype(complex),
    }
    rng2 = np.random.default_rng(21)
    for _ in range(30):
        string = "".join(rng2.choice(list("IXYZ")) for _ in range(3))
        full = mats[string[0]]
        for c in string[1:]:
            full = np.kron(full, mats[c])
        expected = (state @ full @ state).real
        assert pauli_expectation(state, string) == pytest.approx(expected, abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_flat_dense_norm_counts_property(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, 8, int(rng.integers(1, 30)))
    trace, _ = flat_protocol_dense(inst)
    assert trace.norm_sq[-1] * 256 == pytest.approx(count_enumerate(inst), abs=1e-8)
