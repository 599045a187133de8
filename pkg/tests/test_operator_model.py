import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_positive
from quasiext.blocks import HEAD, BlockOperator
from quasiext.errors import SingularInput, ValidationError
from quasiext.operator_model import (DirectSum, Normal, PositiveMap, Pure, ShiftKind, SpectralProfile,
                                     build_tensor_shift, mne, modulus, operator_of, parse_matrix,
                                     parse_spec, polar_decompose, quasinormality_residual,
                                     spec_to_json, spectral_window)


def test_positive_map_diag_is_sorted_permutation_basis():
    A = PositiveMap.diag([2.0, 1.0])
    assert A.eigenvalues.tolist() == [1.0, 2.0]
    assert A.m == 1.0 and A.norm == 2.0 and A.condition == 2.0
    np.testing.assert_array_equal(np.abs(A.eigenvectors), [[0, 1], [1, 0]])


@pytest.mark.parametrize("bad, invariant", [
    ([[2, 1], [0, 1]], "hermitian"),
    ([[1, 0], [0, -1]], "positive_definite"),
    ([[1, 0], [0, 0]], "positive_definite"),
])
def test_positive_map_rejects(bad, invariant):
    with pytest.raises(ValidationError) as info:
        PositiveMap.from_matrix(bad)
    assert info.value.invariant == invariant


def test_positive_map_reconstructs():
    A = random_positive(np.random.default_rng(3), 4)
    q = A.eigenvectors
    np.testing.assert_allclose(q.conj().T @ q, np.eye(4), atol=1e-12)
    np.testing.assert_allclose((q * A.eigenvalues) @ q.conj().T, A.entries, atol=1e-12)


def test_profile_and_shift_kind_invariants():
    with pytest.raises(ValueError):
        SpectralProfile(2.0, 1.0)
    with pytest.raises(ValueError):
        ShiftKind.unilateral(1)
    with pytest.raises(ValueError):
        ShiftKind.bilateral(0)
    assert ShiftKind.bilateral(2).indices == (-2, -1, 0, 1, 2)
    with pytest.raises(ValueError):
        Normal((1.0, 0.0))


def test_tensor_shift_scalar_is_jordan_block():
    T = build_tensor_shift(PositiveMap.diag([1.0]), ShiftKind.unilateral(3))
    np.testing.assert_array_equal(T.to_dense(), np.eye(3, k=-1))


def test_tensor_shift_block_positions():
    A = PositiveMap.diag([2.0, 1.0])
    T = build_tensor_shift(A, ShiftKind.unilateral(2))
    assert set(T.blocks) == {(1, 0)}
    B = build_tensor_shift(A, ShiftKind.bilateral(1))
    assert set(B.blocks) == {(0, -1), (1, 0)}
    np.testing.assert_array_equal(B.block(1, 0), np.diag([2.0, 1.0]))


def test_polar_of_tensor_shift_is_exact():
    A = PositiveMap.diag([2.0, 1.0])
    T = build_tensor_shift(A, ShiftKind.unilateral(3))
    V, P = polar_decompose(T)
    S = np.eye(3, k=-1)
    np.testing.assert_array_equal(V.to_dense(), np.kron(S, np.eye(2)))
    np.testing.assert_array_equal(P.to_dense(), np.kron(np.eye(3), np.diag([2.0, 1.0])))
    np.testing.assert_allclose((V @ P).to_dense(), T.to_dense(), atol=1e-10)


def test_polar_against_dense_square_root_on_interior_columns():
    A = random_positive(np.random.default_rng(1), 2)
    T = build_tensor_shift(A, ShiftKind.unilateral(4))
    t = T.to_dense()
    w, v = np.linalg.eigh(t.conj().T @ t)
    dense_mod = (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T
    # the truncation only changes the last (empty) block column
    np.testing.assert_allclose(modulus(T).to_dense()[:, :6], dense_mod[:, :6], atol=1e-10)


def test_polar_identity_and_scaled_shift():
    V, P = polar_decompose(np.eye(3))
    np.testing.assert_allclose(V, np.eye(3))
    np.testing.assert_allclose(P, np.eye(3))
    T = build_tensor_shift(PositiveMap.diag([3.0]), ShiftKind.unilateral(4))
    V, P = polar_decompose(T)
    np.testing.assert_array_equal(V.to_dense(), np.eye(4, k=-1))
    np.testing.assert_array_equal(P.to_dense(), 3 * np.eye(4))


def test_polar_singular_input():
    with pytest.raises(SingularInput):
        polar_decompose(np.diag([1.0, 0.0]))


def test_quasinormality_residuals():
    T = build_tensor_shift(PositiveMap.diag([2.0, 1.0]), ShiftKind.unilateral(5))
    assert quasinormality_residual(T) <= 1e-12
    assert quasinormality_residual(np.array([[1.0, 1.0], [0.0, 0.0]])) > 0.1
    assert quasinormality_residual(np.diag([3.0, -1j, 2.0])) == 0.0


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 3), st.integers(2, 5), st.integers(0, 10_000))
def test_quasinormality_of_random_models(dim, n, seed):
    A = random_positive(np.random.default_rng(seed), dim)
    T = build_tensor_shift(A, ShiftKind.unilateral(n))
    assert quasinormality_residual(T) <= 1e-10 * A.norm
    V, P = polar_decompose(T)
    np.testing.assert_allclose(V.to_dense(), np.kron(np.eye(n, k=-1), np.eye(dim)), atol=1e-10)
    assert spectral_window(A, A.m, A.m).shape[1] >= 1


def test_spectral_window_examples():
    A = PositiveMap.diag([2.0, 1.0])
    np.testing.assert_array_equal(np.abs(spectral_window(A, 1.9, 2.1)), [[1.0], [0.0]])
    assert spectral_window(A, 0, 3).shape[1] == 2
    assert spectral_window(A, 1.4, 1.6).shape[1] == 0
    with pytest.raises(ValueError):
        spectral_window(A, 2, 1)


def test_mne_restriction_matches_unilateral():
    A = PositiveMap.diag([2.0, 1.0])
    U = mne(Pure(A, ShiftKind.unilateral(3)), 3)
    S = build_tensor_shift(A, ShiftKind.unilateral(3))
    assert set(mne(Pure(A, ShiftKind.unilateral(3)), 2).blocks) == {(-1, -2), (0, -1), (1, 0), (2, 1)}
    for (i, j), b in S.blocks.items():
        np.testing.assert_array_equal(U.block(i, j), b)
    scalar = mne(Pure(PositiveMap.diag([1.0]), ShiftKind.unilateral(2)), 1)
    np.testing.assert_array_equal(scalar.to_dense(), np.eye(3, k=-1))


def test_direct_sum_operator_layout():
    spec = DirectSum(Normal((3.0,)), Pure(PositiveMap.diag([2.0, 1.0]), ShiftKind.unilateral(3)))
    R = operator_of(spec)
    assert R.shape == (7, 7)
    assert R.block(HEAD, HEAD).tolist() == [[3.0]]
    assert quasinormality_residual(R) <= 1e-12


def test_spec_json_round_trip():
    payload = {"type": "direct_sum", "mu": [[3, 0]], "A": [[2, 0], [0, 0], [0, 0], [1, 0]],
               "shift": {"kind": "unilateral", "n": 5},
               "profile": {"m": 1, "M": 2, "m_point": False, "M_point": True}}
    spec, profile = parse_spec(payload)
    assert profile == SpectralProfile(1.0, 2.0, False, True)
    again, _ = parse_spec(spec_to_json(spec))
    np.testing.assert_array_equal(again.pure.A.entries, spec.pure.A.entries)
    assert again.normal.mu == spec.normal.mu and again.pure.shift == spec.pure.shift


def test_parse_matrix_forms():
    flat = parse_matrix([[1, 0], [0, 1], [0, -1], [2, 0]])
    np.testing.assert_array_equal(flat, [[1, 1j], [-1j, 2]])
    rows = parse_matrix([[[1, 0], [0, 1]], [[0, -1], [2, 0]]])
    np.testing.assert_array_equal(rows, flat)
    np.testing.assert_array_equal(parse_matrix([[2, 0], [0, 1]]), np.diag([2, 1]))
    with pytest.raises(ValidationError):
        parse_matrix([[1, 2], [3]])
    with pytest.raises(ValidationError):
        parse_spec({"type": "weird"})


def test_block_operator_arithmetic():
    A = PositiveMap.diag([2.0, 1.0])
    T = build_tensor_shift(A, ShiftKind.unilateral(3))
    np.testing.assert_array_equal((T @ T).to_dense(), T.to_dense() @ T.to_dense())
    np.testing.assert_array_equal((T + T - T * 2).to_dense(), np.zeros((6, 6)))
    np.testing.assert_array_equal(T.adjoint().to_dense(), T.to_dense().conj().T)
    back = BlockOperator.from_dense(T.to_dense(), **T.layout())
    assert set(back.blocks) == set(T.blocks)
    assert T.is_interior(1, 0) and not T.is_interior(0, 0) and not T.is_interior(1, 2)
