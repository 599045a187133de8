import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_positive
from quasiext import alambda
from quasiext import extended_spectrum as es
from quasiext.operator_model import DirectSum, Normal, PositiveMap, Pure, ShiftKind, SpectralProfile

A21 = PositiveMap.diag([2.0, 1.0])


def disk(region):
    (c,) = [c for c in region.components if isinstance(c, es.DiskComplement)]
    return c.radius, c.boundary_included


def test_intertwining_region_examples():
    assert disk(es.intertwining_region(A21, A21)) == (0.5, True)
    assert disk(es.intertwining_region(SpectralProfile(1, 1, False, True),
                                       SpectralProfile(1, 2, True, True))) == (0.5, False)
    reg = es.intertwining_region(SpectralProfile(0, 1), SpectralProfile(1, 2))
    assert disk(reg) == (0.0, True) and 1e-9 in reg


def test_pure_examples():
    assert disk(es.pure_extended_spectrum(A21)) == (0.5, True)
    assert disk(es.pure_extended_spectrum(PositiveMap.from_matrix(np.eye(3)))) == (1.0, True)
    assert disk(es.pure_extended_spectrum(SpectralProfile(1, 2, False, True))) == (0.5, False)


def test_normal_ratio_sets():
    assert set(es.normal_extended_spectrum([1, 2]).components[0].points) == {1, 2, 0.5}
    assert es.normal_extended_spectrum([3 + 1j]).components[0].points == (1,)
    assert set(es.normal_extended_spectrum([1, 1j]).components[0].points) == {1, 1j, -1j}


def test_quasinormal_cases():
    pure = Pure(A21, ShiftKind.unilateral(8))
    reg = es.quasinormal_extended_spectrum(DirectSum(Normal((3,)), pure))
    assert disk(reg) == (0.5, True)
    assert 1 in reg and 0.5 in reg and 0.3 not in reg and 0.9 in reg
    reg = es.quasinormal_extended_spectrum(DirectSum(Normal((0.4,)), pure))
    assert disk(reg) == (pytest.approx(0.2), True)
    reg = es.quasinormal_region_from_profiles(SpectralProfile(1, 1, False, False),
                                              SpectralProfile(1, 2, False, False))
    assert disk(reg)[1] is False


@pytest.mark.parametrize("n_flags, t_flags, m_n, expect", [
    ((True, True), (False, True), 0.5, True),    # a: m_N point, M_T point
    ((False, True), (True, True), 0.5, False),   # a: m_N not a point
    ((False, False), (True, True), 1.0, True),   # b: both ends of |T| points
    ((True, True), (False, True), 1.0, True),    # b: m_N and M_T points
    ((True, True), (True, False), 1.0, False),   # b: M_T missing
    ((True, True), (True, True), 1.5, True),     # c
    ((True, True), (False, True), 1.5, False),   # c: m_T not a point
])
def test_direct_sum_boundary_cases(n_flags, t_flags, m_n, expect):
    n = SpectralProfile(m_n, 3.0, *n_flags)
    t = SpectralProfile(1.0, 2.0, *t_flags)
    assert disk(es.quasinormal_region_from_profiles(n, t))[1] is expect


def test_bilateral_examples():
    (ann,) = es.bilateral_extended_spectrum(A21).components
    assert (ann.r_in, ann.r_out, ann.inner_included, ann.outer_included) == (0.5, 2.0, True, True)
    unit_circle = es.bilateral_extended_spectrum(PositiveMap.from_matrix(np.eye(2)))
    assert 1j in unit_circle and 1.01 not in unit_circle
    open_ann = es.bilateral_extended_spectrum(SpectralProfile(1, 2, True, False))
    assert 0.5 not in open_ann and 1.0 in open_ann and 2.0 not in open_ann


def test_contains_examples():
    assert es.contains(es.Region((es.DiskComplement(0.5, True),)), 0.5)
    assert not es.contains(es.Region((es.DiskComplement(0.5, False),)), 0.5)
    assert es.contains(es.Region((es.FiniteSet((1, 2, 0.5)),)), 2)


def test_region_json_round_trip():
    reg = es.Region((es.DiskComplement(0.5, True), es.Annulus(0.5, 2, True, False),
                     es.FiniteSet((1, 1j))))
    assert es.Region.from_json(reg.to_json()) == reg


def test_polar_grid_rows():
    rows = es.polar_grid(es.pure_extended_spectrum(A21), [0.4, 0.5], [0.0, np.pi])
    assert [r[2] for r in rows] == [0, 0, 1, 1]


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 6), st.integers(0, 10_000))
def test_region_matches_pattern_nonemptiness(dim, seed):
    A = random_positive(np.random.default_rng(seed), dim)
    reg = es.pure_extended_spectrum(A)
    for r in np.geomspace(0.05, 20, 41):
        assert es.contains(reg, r * np.exp(0.3j)) == alambda.is_nontrivial(A, A, r)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 4), st.floats(0.01, 100), st.integers(0, 10_000))
def test_bilateral_scale_invariance(dim, c, seed):
    A = random_positive(np.random.default_rng(seed), dim)
    a = es.bilateral_extended_spectrum(A).components[0]
    b = es.bilateral_extended_spectrum(A.scaled(c)).components[0]
    assert a.r_in == pytest.approx(b.r_in, rel=1e-12) and a.r_out == pytest.approx(b.r_out, rel=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.1, 5), st.integers(0, 10_000))
def test_direct_sum_region_contains_pure_region(mu, seed):
    A = random_positive(np.random.default_rng(seed), 2)
    spec = DirectSum(Normal((mu,)), Pure(A, ShiftKind.unilateral(4)))
    full, pure = es.quasinormal_extended_spectrum(spec), es.pure_extended_spectrum(A)
    for r in np.geomspace(0.05, 20, 30):
        if es.contains(pure, r):
            assert es.contains(full, r)
