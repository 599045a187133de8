import warnings

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings, strategies as st

from conftest import random_positive, unit
from quasiext import alambda
from quasiext.eigvec_construct import assemble_quasinormal_eigvec, conjugate_intertwiner, diag_construction
from quasiext.errors import DimensionMismatch, NotNormal, TooLarge
from quasiext.operator_model import (DirectSum, Normal, PositiveMap, Pure, ShiftKind, build_tensor_shift,
                                     operator_of)
from quasiext import sylvester_oracle as so

A21 = PositiveMap.diag([2.0, 1.0])


def shift_model(A, n):
    return build_tensor_shift(A, ShiftKind.unilateral(n))


def test_diagonal_nullspace_examples():
    D = np.diag([1.0, 2.0])
    res = so.nullspace(D, D, 2.0)
    assert res.dimension == 1
    np.testing.assert_allclose(np.abs(res.matrices()[0]), unit(2, 2, 1), atol=1e-12)
    assert so.nullspace(D, D, 3.0).dimension == 0
    M = np.random.default_rng(0).standard_normal((3, 3))
    assert so.nullspace(M, M, 1.0).dimension >= 1


def test_nullspace_basis_invariants():
    T = shift_model(A21, 5)
    res = so.nullspace(T, T, 1.0)
    B = res.stacked()
    np.testing.assert_allclose(B.conj().T @ B, np.eye(res.dimension), atol=1e-10)
    t = T.to_dense()
    for x in res.matrices():
        assert np.linalg.norm(t @ x - x @ t, 2) <= 1e-8 * np.linalg.norm(t, 2)
    assert res.smallest_kept_gap >= 1e4


def test_truncated_equation_is_blind_to_growth():
    # every lambda gives N * dim^2 solutions before filtering
    T = shift_model(A21, 5)
    assert {so.nullspace(T, T, lam).dimension for lam in (0.3, 1.0, 3.0)} == {20}


def test_size_limit():
    T = shift_model(PositiveMap.diag(np.arange(1.0, 9.0)), 9)
    with pytest.raises(TooLarge):
        so.nullspace(T, T, 1.0)
    with pytest.raises(TooLarge):
        so.scan_region(shift_model(A21, 3), range(65), [0.0])


@pytest.mark.parametrize("r, dim", [(0.3, 0), (0.45, 0), (0.5, 11), (0.7, 11), (1.0, 33),
                                    (1.5, 33), (2.0, 44), (3.0, 44)])
def test_filtered_dimensions_n12(r, dim):
    # frozen from the transfer-map filter; (N - 1) * |mask| with N = 12
    assert so.filtered_nullspace(shift_model(A21, 12), r * np.exp(0.4j)).dimension == dim


def test_filtered_lambda_zero_is_empty():
    assert so.filtered_nullspace(shift_model(A21, 6), 0.0).dimension == 0


def test_filtered_contains_constructions():
    T = shift_model(A21, 6)
    null = so.filtered_nullspace(T, 1.0)
    for L in alambda.pattern_for(A21, A21, 1.0).basis():
        X = diag_construction(A21, L, 1.0, 6)
        assert null.projection_deficiency(X.base) <= 1e-8


def test_filtered_elements_satisfy_interior_recurrence():
    lam = 1.3 * np.exp(1j)
    T = shift_model(A21, 6)
    a = A21.entries
    for X in so.filtered_nullspace(T, lam).basis:
        for i in range(5):
            for j in range(5):
                r = a @ X.block(i, j) - lam * X.block(i + 1, j + 1) @ a
                assert np.linalg.norm(r, 2) <= 1e-9


def test_first_block_row_vanishes_off_corner():
    T = shift_model(A21, 6)
    for lam in (0.4, 1.0, 2.5j):
        for X in so.nullspace(T, T, lam).basis:
            for j in range(1, 5):
                assert np.linalg.norm(X.block(0, j), 2) <= 1e-9


def test_scan_examples():
    pts = so.scan_region(shift_model(A21, 6), [0.3, 0.5, 0.7, 1, 2], np.linspace(0, 2 * np.pi, 8, endpoint=False))
    assert all(p.member == (p.radius >= 0.5) for p in pts)
    ident = so.scan_region(shift_model(PositiveMap.diag([1.0, 1.0]), 5), [0.9, 1.0, 1.1], [0.0, 1.0])
    assert all(p.member == (p.radius >= 1.0) for p in ident)
    assert so.scan_region(shift_model(A21, 4), [], [0.0]) == []


def test_scan_ordering_independent_of_workers():
    T = shift_model(A21, 4)
    one = so.scan_region(T, [1.0, 0.3, 0.6], [1.0, 0.0], workers=1)
    many = so.scan_region(T, [1.0, 0.3, 0.6], [1.0, 0.0], workers=3)
    assert one == many
    assert [(p.radius, p.angle) for p in one] == sorted((p.radius, p.angle) for p in one)


def test_corner_check():
    spec = DirectSum(Normal((3.0,)), Pure(A21, ShiftKind.unilateral(6)))
    for X in so.filtered_nullspace(spec, 1.0).basis:
        assert so.subnormal_corner_check(spec, X)
    W = diag_construction(A21, np.eye(2), 1.0, 6)
    X = assemble_quasinormal_eigvec([[1.0]], [[0.0, 0.0]], W, spec, 1.0)
    assert so.subnormal_corner_check(spec, X)
    bad = X.to_dense()
    bad[1, 0] = 1.0
    assert not so.subnormal_corner_check(spec, bad)
    with pytest.raises(DimensionMismatch):
        so.subnormal_corner_check(spec, np.eye(3))


def test_fuglede_putnam_examples():
    D = np.diag([1.0, 2.0])
    assert so.fuglede_putnam_check(D, unit(2, 2, 1), D, 2.0).holds
    Di = np.diag([1.0, 1j])
    res = so.fuglede_putnam_check(Di, unit(2, 2, 1), Di, 1j)
    assert res.holds and res.hypothesis_met
    vac = so.fuglede_putnam_check(D, np.ones((2, 2)), D, 2.0)
    assert vac.holds and not vac.hypothesis_met
    with pytest.raises(NotNormal):
        so.fuglede_putnam_check(np.array([[0, 1], [0, 0]]), np.eye(2), D, 1.0)


def test_gap_warning_on_fragile_rank():
    with pytest.warns(RuntimeWarning):
        # null singular value 1e-10 against a kept one of 1e-8
        so.nullspace(np.diag([1.0, 2.0]), np.diag([1.0 + 1e-10, 1.0 + 1e-8]), 1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        so.nullspace(np.diag([1.0, 2.0]), np.diag([1.0, 2.0]), 1.0)


@settings(max_examples=10, deadline=None)
@given(st.floats(0.1, 10.0), st.sampled_from([0.3, 0.5, 1.0, 1.7, 2.5]), st.integers(0, 10_000))
def test_scale_invariance(c, r, seed):
    A = random_positive(np.random.default_rng(seed), 2)
    lam = r * A.m / A.norm * 2 * np.exp(0.5j)
    T, cT = shift_model(A, 5), shift_model(A.scaled(c), 5)
    a, b = so.nullspace(T, T, lam), so.nullspace(cT, cT, lam)
    assert a.dimension == b.dimension
    assert np.max(sla.subspace_angles(a.stacked(), b.stacked())) <= 1e-7
    assert so.filtered_nullspace(T, lam).dimension == so.filtered_nullspace(cT, lam).dimension


@settings(max_examples=10, deadline=None)
@given(st.sampled_from([0.5, 1.0, 2.0]), st.integers(0, 10_000))
def test_conjugation_covariance(lam, seed):
    rng = np.random.default_rng(seed)
    T = shift_model(A21, 3).to_dense()
    U = np.eye(6) + 0.3 * rng.standard_normal((6, 6))
    Ti = U @ T @ np.linalg.inv(U)
    base = so.nullspace(T, T, lam)
    conj = so.nullspace(Ti, Ti, lam)
    moved = np.column_stack([conjugate_intertwiner(x, U).ravel(order="F") for x in base.matrices()])
    assert conj.dimension == base.dimension
    assert np.max(sla.subspace_angles(moved, conj.stacked())) <= 1e-7


def test_candidate_lambdas_of_normal_diagonal():
    w = so.candidate_lambdas(np.diag([1.0, 2.0]), np.diag([1.0, 2.0]))
    assert sorted(np.round(w.real, 12)) == [0.5, 1.0, 1.0, 2.0]
    assert so.filtered_nullspace(operator_of(Pure(A21, ShiftKind.unilateral(4))), 0.5).dimension > 0
