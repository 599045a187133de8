"""Growth algebras ``A_r(R, A)`` and their bilateral variant.

``L`` belongs to ``A_r(R, A)`` when ``||r^-n R^n L x|| <= c ||A^n x||`` for
all ``n`` and ``x``. With both operators diagonalised, the entry
``(i, j)`` of ``L`` (in eigen-coordinates) is scaled by
``(rho_i / (r alpha_j))^n``, so membership reduces to a sparsity test:
every nonzero entry must sit where ``rho_i <= r alpha_j``.

All masks and certificate indices are in eigen-coordinates, ascending
eigenvalue order on both sides. Use :meth:`SparsityPattern.standard_mask`
to read a mask in the original coordinates of diagonal inputs.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionMismatch
from .operator_model import PositiveMap

ZERO_TOL = 1e-12
# relative slack on rho_i <= r alpha_j so that boundary ratios such as
# r = m / ||A|| survive the division round trip
RATIO_SLACK = 1e-12


def to_eigen(L, left: PositiveMap, right: PositiveMap) -> np.ndarray:
    """Coordinates of ``L`` in the eigenbases: ``Q_left^* L Q_right``."""
    return left.eigenvectors.conj().T @ np.asarray(L, dtype=complex) @ right.eigenvectors


def from_eigen(Lt, left: PositiveMap, right: PositiveMap) -> np.ndarray:
    return left.eigenvectors @ np.asarray(Lt, dtype=complex) @ right.eigenvectors.conj().T


def growth_ratios(left: PositiveMap, right: PositiveMap, r: float) -> np.ndarray:
    """Per-step growth factor ``rho_i / (r alpha_j)`` of each eigen-entry."""
    return left.eigenvalues[:, None] / (r * right.eigenvalues[None, :])


@dataclass(frozen=True, eq=False)
class SparsityPattern:
    rows: int
    cols: int
    mask: np.ndarray
    left: PositiveMap
    right: PositiveMap
    r: float

    @property
    def empty(self) -> bool:
        return not self.mask.any()

    def contains(self, L) -> bool:
        lt = to_eigen(L, self.left, self.right)
        scale = np.linalg.norm(lt, 2) if lt.size else 0.0
        nz = np.abs(lt) > ZERO_TOL * scale
        return bool(np.all(self.mask[nz]))

    def basis(self) -> list:
        """Matrix units of the pattern, mapped back to original coordinates."""
        out = []
        for i, j in zip(*np.nonzero(self.mask)):
            e = np.zeros((self.rows, self.cols), dtype=complex)
            e[i, j] = 1.0
            out.append(from_eigen(e, self.left, self.right))
        return out

    def standard_mask(self) -> np.ndarray:
        """The mask in the original coordinates.

        Only defined when both eigenbases are permutations of the standard
        basis (diagonal inputs).
        """
        pl, pr = _permutation(self.left.eigenvectors), _permutation(self.right.eigenvectors)
        if pl is None or pr is None:
            raise ValueError("standard_mask needs diagonal (permutation-basis) operators")
        out = np.zeros_like(self.mask)
        for i in range(self.rows):
            for j in range(self.cols):
                out[pl[i], pr[j]] = self.mask[i, j]
        return out

    def grid(self, standard: bool = False) -> str:
        m = self.standard_mask() if standard else self.mask
        return "\n".join(" ".join("1" if v else "0" for v in row) for row in m)


def _permutation(q):
    """``perm`` with ``q[:, k] = e_{perm[k]}`` or ``None``."""
    a = np.abs(q)
    if not np.all((a == 0) | (a == 1)) or not np.all(a.sum(axis=0) == 1):
        return None
    return [int(np.argmax(a[:, k])) for k in range(q.shape[1])]


@dataclass(frozen=True)
class GrowthCertificate:
    member: bool
    sup_bound: Optional[float] = None
    worst_entry: Optional[tuple] = None

    def to_json(self) -> dict:
        out = {"member": self.member}
        if self.sup_bound is not None:
            out["sup_bound"] = self.sup_bound
        if self.worst_entry is not None:
            i, j, g = self.worst_entry
            out["worst_entry"] = {"i": i, "j": j, "growth_ratio": g}
        return out


def pattern_for(R_modulus: PositiveMap, A: PositiveMap, r: float) -> SparsityPattern:
    if not r > 0:
        raise ValueError("r must be positive")
    mask = growth_ratios(R_modulus, A, r) <= 1.0 + RATIO_SLACK
    mask.setflags(write=False)
    return SparsityPattern(R_modulus.dim, A.dim, mask, R_modulus, A, float(r))


def membership(L, R_modulus: PositiveMap, A: PositiveMap, r: float) -> GrowthCertificate:
    """Decide ``L in A_r(R, A)`` and certify it.

    ``sup_bound`` is the spectral norm of the entrywise modulus of ``L`` in
    eigen-coordinates; it dominates ``||r^-n R^n L A^-n||`` for every ``n``.
    A non-member reports the eigen-entry with the largest growth ratio.
    """
    L = np.atleast_2d(np.asarray(L, dtype=complex))
    if L.shape != (R_modulus.dim, A.dim):
        raise DimensionMismatch(f"L has shape {L.shape}, expected {(R_modulus.dim, A.dim)}")
    if not r > 0:
        raise ValueError("r must be positive")
    lt = to_eigen(L, R_modulus, A)
    scale = np.linalg.norm(L, 2)
    if scale == 0:
        return GrowthCertificate(True, 0.0)
    nz = np.abs(lt) > ZERO_TOL * scale
    ratios = growth_ratios(R_modulus, A, r)
    if np.all(ratios[nz] <= 1.0 + RATIO_SLACK):
        bound = float(np.linalg.norm(np.where(nz, np.abs(lt), 0.0), 2))
        return GrowthCertificate(True, bound)
    masked = np.where(nz, ratios, -np.inf)
    i, j = np.unravel_index(int(np.argmax(masked)), masked.shape)
    return GrowthCertificate(False, worst_entry=(int(i), int(j), float(ratios[i, j])))


@dataclass(frozen=True)
class ClosureCheck:
    m1: GrowthCertificate
    m2: GrowthCertificate
    m_product: GrowthCertificate


def algebra_closure_check(L1, L2, A: PositiveMap, r: float) -> ClosureCheck:
    """Membership of ``L1``, ``L2`` and ``L1 L2`` in ``A_r(A)``."""
    L1 = np.asarray(L1, dtype=complex)
    L2 = np.asarray(L2, dtype=complex)
    for L in (L1, L2):
        if L.shape != (A.dim, A.dim):
            raise DimensionMismatch(f"expected {(A.dim, A.dim)} matrices, got {L.shape}")
    return ClosureCheck(membership(L1, A, A, r), membership(L2, A, A, r),
                        membership(L1 @ L2, A, A, r))


def bilateral_membership(L, A: PositiveMap, lambda_abs: float) -> bool:
    """``sup over all integers n of ||lambda^-n A^n L A^-n||`` is finite.

    In finite dimensions this holds iff ``A L = |lambda| L A``, i.e. every
    nonzero eigen-entry has ``alpha_i = |lambda| alpha_j``.
    """
    L = np.atleast_2d(np.asarray(L, dtype=complex))
    if L.shape != (A.dim, A.dim):
        raise DimensionMismatch(f"L has shape {L.shape}, expected {(A.dim, A.dim)}")
    if not lambda_abs > 0:
        raise ValueError("lambda_abs must be positive")
    scale = np.linalg.norm(L, 2)
    if scale == 0:
        return True
    lt = to_eigen(L, A, A)
    nz = np.abs(lt) > ZERO_TOL * scale
    return bool(np.all(bilateral_mask(A, lambda_abs)[nz]))


def bilateral_mask(A: PositiveMap, lambda_abs: float) -> np.ndarray:
    """Eigen-entries with ``alpha_i = lambda_abs alpha_j`` (relative ``RATIO_SLACK``)."""
    a = A.eigenvalues
    lhs = a[:, None] * np.ones_like(a)[None, :]
    rhs = lambda_abs * a[None, :] * np.ones_like(a)[:, None]
    return np.abs(lhs - rhs) <= RATIO_SLACK * np.maximum(lhs, rhs)


def is_nontrivial(R_modulus: PositiveMap, A: PositiveMap, r: float) -> bool:
    """``A_r(R, A) != {0}``; in finite dimensions ``r >= m_R / ||A||``."""
    return not pattern_for(R_modulus, A, r).empty


def deddens_pattern(A: PositiveMap) -> SparsityPattern:
    return pattern_for(A, A, 1.0)


def growth_quotients(L, R_modulus: PositiveMap, A: PositiveMap, r: float, x,
                     n_max: int = 60) -> np.ndarray:
    """``||r^-n R^n L x|| / ||A^n x||`` for ``n = 0..n_max`` (diagnostic only).

    Eigen-entries of ``L`` below the zero threshold of :func:`membership`
    are dropped, so the diagnostic measures the operator that was judged.
    """
    L = np.asarray(L, dtype=complex)
    x = np.asarray(x, dtype=complex)
    lt = to_eigen(L, R_modulus, A)
    lt = np.where(np.abs(lt) > ZERO_TOL * np.linalg.norm(L, 2), lt, 0.0)
    ax = A.to_eigen(x)
    lx = lt @ ax
    out = np.empty(n_max + 1)
    for n in range(n_max + 1):
        num = np.linalg.norm(R_modulus.eigenvalues ** n * lx) / r ** n
        den = np.linalg.norm(A.eigenvalues ** n * ax)
        out[n] = num / den
    return out
