"""Brute-force ground truth for ``T1 X = lambda X T2``.

The equation is linearised with
``vec(T1 X - lambda X T2) = (I (x) T1 - lambda T2^T (x) I) vec(X)``
(column-major ``vec``) and its nullspace read off a full SVD.

Truncating the shift makes the finite equation blind to the growth
condition that decides boundedness: every band seed propagates, whether
or not it blows up. :func:`filtered_nullspace` recovers the bounded part
without reference to any closed-form criterion. Restricting a solution to
the top-left ``N-1`` blocks and to the blocks shifted by one both give
solutions of the ``N-1`` problem; the linear map sending the first
restriction to the second is the one-step transfer along the bands.
Bounded solutions are those in the invariant subspace where the transfer
does not expand. Directions killed by the top-left restriction (support on
the last block row only) are dropped as truncation artifacts.
"""
from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .blocks import HEAD, BlockOperator, as_block
from .errors import DimensionMismatch, NotNormal, TooLarge
from .operator_model import DirectSum, operator_of

MAX_DIM = 4096
MAX_RADII = 64
MAX_ANGLES = 16
GAP_WARN = 1e4
RATE_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class NullspaceResult:
    dimension: int
    basis: list
    smallest_kept_gap: float
    rates: tuple = field(default=())

    def matrices(self) -> list:
        return [b.to_dense() for b in self.basis]

    def stacked(self) -> np.ndarray:
        """Basis as orthonormal columns of ``vec(X)`` (column-major)."""
        if not self.basis:
            return np.zeros((0, 0), dtype=complex)
        return np.column_stack([b.to_dense().ravel(order="F") for b in self.basis])

    def projection_deficiency(self, X) -> float:
        """``||x - P x|| / ||x||`` for the orthogonal projector onto the span."""
        x = (X.to_dense() if isinstance(X, BlockOperator) else np.asarray(X)).ravel(order="F")
        nx = np.linalg.norm(x)
        if nx == 0:
            return 0.0
        if not self.basis:
            return 1.0
        B = self.stacked()
        return float(np.linalg.norm(x - B @ (B.conj().T @ x)) / nx)


def _layout(T1: BlockOperator, T2: BlockOperator) -> dict:
    return T1.product_layout(T2)


def nullspace(T1, T2, lam, tol: float = 1e-9) -> NullspaceResult:
    """Solutions ``X`` of ``T1 X = lam X T2``.

    Singular values at most ``tol * (||T1|| + |lam| ||T2||)`` count as zero.
    """
    T1, T2 = as_block(T1), as_block(T2)
    n1, n2 = T1.shape[0], T2.shape[0]
    if T1.shape[0] != T1.shape[1] or T2.shape[0] != T2.shape[1]:
        raise DimensionMismatch("T1 and T2 must be square")
    if n1 * n2 > MAX_DIM:
        raise TooLarge(f"linearised system has {n1 * n2} unknowns (limit {MAX_DIM})")
    t1, t2 = T1.to_dense(), T2.to_dense()
    K = np.kron(np.eye(n2), t1) - lam * np.kron(t2.T, np.eye(n1))
    _, s, vh = np.linalg.svd(K)
    # relative to the operator scale, not s[0], so a tiny 1x1 K still counts as singular
    scale = np.linalg.norm(t1, 2) + abs(lam) * np.linalg.norm(t2, 2)
    null = np.nonzero(s <= tol * scale)[0] if scale > 0 else np.arange(len(s))
    kept = s[: len(s) - len(null)]
    if len(null) == 0 or len(kept) == 0:
        gap = float("inf")
    else:
        gap = float(kept[-1] / max(s[null[0]], np.finfo(float).tiny))
    if gap < GAP_WARN:
        warnings.warn(f"singular-value gap {gap:.3g} below {GAP_WARN:g}; rank decision is fragile",
                      RuntimeWarning, stacklevel=2)
    layout = _layout(T1, T2)
    basis = [BlockOperator.from_dense(vh[k].conj().reshape(n1, n2, order="F"), **layout)
             for k in null]
    return NullspaceResult(len(basis), basis, gap)


def candidate_lambdas(T1, T2) -> np.ndarray:
    """All ``lambda`` making ``T1 X = lambda X T2`` singular.

    These are the finite generalized eigenvalues of the pencil
    ``(I (x) T1, T2^T (x) I)``; meaningful for regular pencils (e.g. both
    operators invertible).
    """
    t1 = as_block(T1).to_dense()
    t2 = as_block(T2).to_dense()
    n1, n2 = t1.shape[0], t2.shape[0]
    if n1 * n2 > MAX_DIM:
        raise TooLarge(f"pencil has size {n1 * n2} (limit {MAX_DIM})")
    w = sla.eigvals(np.kron(np.eye(n2), t1), np.kron(t2.T, np.eye(n1)))
    return w[np.isfinite(w)]


def _restrict(X: np.ndarray, T: BlockOperator, keep) -> np.ndarray:
    rows = T.row_slices
    idx = np.concatenate([np.arange(rows[k].start, rows[k].stop) for k in keep])
    return X[np.ix_(idx, idx)]


def filtered_nullspace(T, lam, tol: float = 1e-9) -> NullspaceResult:
    """Bounded, non-artifact solutions of ``T X = lam X T`` on a unilateral grid.

    ``T`` is an ``A (x) S`` model (optionally with a normal head summand)
    or a :class:`DirectSum`/``Pure`` spec. ``rates`` in the result holds the
    moduli of the transfer-map eigenvalues, sorted.
    """
    if not isinstance(T, BlockOperator):
        T = operator_of(T)
    if T.bilateral or len(T.row_indices) < 2:
        raise ValueError("filtered_nullspace needs a unilateral grid with N >= 2")
    full = nullspace(T, T, lam, tol)
    if full.dimension == 0:
        return full
    ix = T.row_indices
    head = [HEAD] if T.head_row else []
    keep_tl = head + list(ix[:-1])
    keep_sh = head + list(ix[1:])
    dense = [b.to_dense() for b in full.basis]
    P = np.column_stack([_restrict(x, T, keep_tl).ravel(order="F") for x in dense])
    Q = np.column_stack([_restrict(x, T, keep_sh).ravel(order="F") for x in dense])
    _, sp, vh = np.linalg.svd(P, full_matrices=False)
    r = int(np.sum(sp > tol * sp[0])) if sp.size and sp[0] > 0 else 0
    if r == 0:
        return NullspaceResult(0, [], full.smallest_kept_gap)
    Z = vh[:r].conj().T
    Pz, Qz = P @ Z, Q @ Z
    phi = np.linalg.lstsq(Pz, Qz, rcond=None)[0]
    resid = np.linalg.norm(Pz @ phi - Qz) / max(np.linalg.norm(Qz), np.finfo(float).tiny)
    if resid > 1e-6:
        warnings.warn(f"shifted restriction leaves the restricted solution space (residual {resid:.2e})",
                      RuntimeWarning, stacklevel=2)
    _, vecs, sdim = sla.schur(phi, output="complex", sort=lambda z: abs(z) <= 1.0 + RATE_TOL)
    rates = tuple(sorted(float(abs(z)) for z in np.linalg.eigvals(phi)))
    coeffs = Z @ vecs[:, :sdim]
    B = np.column_stack([x.ravel(order="F") for x in dense])
    kept = B @ coeffs
    n = T.shape[0]
    basis = [T.like(kept[:, k].reshape(n, n, order="F")) for k in range(sdim)]
    return NullspaceResult(sdim, basis, full.smallest_kept_gap, rates)


@dataclass(frozen=True)
class ScanPoint:
    radius: float
    angle: float
    dimension: int

    @property
    def member(self) -> bool:
        return self.dimension > 0


def scan_region(T, radii, angles, tol: float = 1e-9, workers: int = 1) -> list:
    """Filtered nullspace dimension at every ``radius * exp(i angle)``.

    Output is ordered by ``(radius, angle)`` whatever ``workers`` is.
    """
    radii, angles = list(radii), list(angles)
    if len(radii) > MAX_RADII or len(angles) > MAX_ANGLES:
        raise TooLarge(f"grid {len(radii)}x{len(angles)} exceeds {MAX_RADII}x{MAX_ANGLES}")
    if not isinstance(T, BlockOperator):
        T = operator_of(T)
    points = sorted((float(r), float(t)) for r in radii for t in angles)

    def one(p):
        r, t = p
        return ScanPoint(r, t, filtered_nullspace(T, r * np.exp(1j * t), tol).dimension)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, points))
    return [one(p) for p in points]


def _split(X, e):
    d = X.to_dense() if isinstance(X, BlockOperator) else np.asarray(X, dtype=complex)
    return d[:e, :e], d[:e, e:], d[e:, :e], d[e:, e:]


def subnormal_corner_check(spec: DirectSum, X, lam=None, tol: float = 1e-9) -> bool:
    """Lower-left corner (pure rows, normal columns) of ``X`` vanishes."""
    e = spec.normal.dim
    size = e + spec.pure.A.dim * len(spec.pure.shift.indices)
    d = X.to_dense() if isinstance(X, BlockOperator) else np.asarray(X, dtype=complex)
    if d.shape != (size, size):
        raise DimensionMismatch(f"X has shape {d.shape}, expected {(size, size)}")
    corner = d[e:, :e]
    scale = np.linalg.norm(d, 2)
    return bool(np.linalg.norm(corner, 2) <= tol * scale) if scale else True


@dataclass(frozen=True)
class FugledePutnamResult:
    holds: bool
    hypothesis_met: bool
    residual: float
    adjoint_residual: float

    def __bool__(self):
        return self.holds


def fuglede_putnam_check(N1, X, N2, lam, tol: float = 1e-9) -> FugledePutnamResult:
    """If ``N1 X = lam X N2`` then ``N1* X = conj(lam) X N2*`` (normal ``N1``, ``N2``)."""
    n1 = np.asarray(N1, dtype=complex)
    n2 = np.asarray(N2, dtype=complex)
    x = np.asarray(X, dtype=complex)
    for n in (n1, n2):
        nn = np.linalg.norm(n, 2)
        if np.linalg.norm(n @ n.conj().T - n.conj().T @ n, 2) > tol * max(nn * nn, 1.0):
            raise NotNormal("operand is not normal within tolerance")
    scale = (np.linalg.norm(n1, 2) + abs(lam) * np.linalg.norm(n2, 2)) * max(np.linalg.norm(x, 2), 1e-300)
    res = float(np.linalg.norm(n1 @ x - lam * x @ n2, 2))
    adj = float(np.linalg.norm(n1.conj().T @ x - np.conj(lam) * x @ n2.conj().T, 2))
    if res > tol * scale:
        return FugledePutnamResult(True, False, res, adj)
    return FugledePutnamResult(adj <= 10 * tol * scale, True, res, adj)
