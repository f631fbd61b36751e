import numpy as np
import pytest

from satmps.boolalg import (
    boolean_basis,
    boolean_dim,
    build_bit_matrix,
    compare_dimensions,
    spans_rows,
    svd_rank,
)
from satmps.generator import generate_satisfiable, random_instance
from satmps.models import refined_peak


def test_all_ones_matrix_rank_one():
    matrix = np.ones((4, 4), dtype=bool)
    assert boolean_dim(matrix) == 1
    assert svd_rank(matrix) == 1


def test_identity_pattern_full_rank():
    matrix = np.eye(4, dtype=bool)
    assert boolean_dim(matrix) == 4
    assert svd_rank(matrix) == 4


def test_empty_matrix_rejected_and_zero_rows_skipped():
    with pytest.raises(ValueError):
        boolean_basis(np.empty((0, 0), dtype=bool))
    matrix = np.zeros((3, 3), dtype=bool)
    matrix[1, :] = True
    assert boolean_dim(matrix) == 1


def test_span_property_exhaustive_n12():
    inst = generate_satisfiable(12, 40, seed=1)
    for m in (5, 15, 30, 40):
        matrix = build_bit_matrix(inst, 6, m)
        basis = boolean_basis(matrix)
        assert spans_rows(matrix, basis)


def test_boolean_dim_bounded_by_distinct_rows():
    rng = np.random.default_rng(2)
    inst = random_instance(rng, 10, 25)
    matrix = build_bit_matrix(inst, 5)
    distinct = len({row.tobytes() for row in matrix if row.any()})
    assert boolean_dim(matrix) <= distinct


def test_svd_rank_matches_schmidt_count():
    from satmps.dense import schmidt

    inst = generate_satisfiable(10, 28, seed=3)
    matrix = build_bit_matrix(inst, 5)
    state = matrix.astype(float).reshape(-1)
    state /= np.linalg.norm(state)
    spectrum = schmidt(state, 5)
    # Schmidt values above cutoff relative to the unnormalized matrix scale
    scaled_cutoff = 1e-10 / np.linalg.norm(matrix.astype(float))
    assert svd_rank(matrix) == int((spectrum.values > scaled_cutoff).sum())
    assert svd_rank(matrix) <= min(2**5, 2**5)


def test_compare_dimensions_endpoints():
    inst = generate_satisfiable(8, 20, seed=4)
    records = compare_dimensions(inst, 4)
    assert records[0].m == 0
    assert records[0].boolean_dim == 1
    assert records[0].svd_rank == 1
    assert len(records) == 21


def test_compare_dimensions_unsat_tail_zero():
    rng = np.random.default_rng(5)
    inst = None
    for seed in range(60):
        cand = random_instance(np.random.default_rng(seed), 8, 90)
        from satmps.counting import count_enumerate

        if count_enumerate(cand) == 0:
            inst = cand
            break
    assert inst is not None
    records = compare_dimensions(inst, 4)
    assert records[-1].boolean_dim == 0
    assert records[-1].svd_rank == 0


def test_rise_fall_shape_and_peak_proximity():
    inst = generate_satisfiable(12, 51, seed=6)
    records = compare_dimensions(inst, 6)
    ms = np.array([r.m for r in records], dtype=float)
    bdim = np.array([r.boolean_dim for r in records], dtype=float)
    rank = np.array([r.svd_rank for r in records], dtype=float)
    for curve in (bdim, rank):
        peak = curve.argmax()
        assert 0 < peak < len(curve) - 1
        assert curve[peak] > curve[0] and curve[peak] > curve[-1]
    m_b, _ = refined_peak(ms, bdim)
    m_r, _ = refined_peak(ms, rank)
    assert abs(m_b - m_r) <= 2.0
