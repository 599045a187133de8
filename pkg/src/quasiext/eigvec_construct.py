"""Explicit extended eigenvectors of the shift models, and their checks.

Band convention: a band's *offset* is ``row - col``, i.e. the power ``m``
in ``(I (x) S^m) D``. Lower-triangular operators (all that the unilateral
model admits) have offsets ``>= 0``.

Diagonal blocks ``lambda^-n A^n L A^-n`` are always produced by
:func:`conjugated_power`, which scales eigen-entries directly instead of
multiplying matrix powers.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import alambda
from .blocks import HEAD, BlockOperator, as_block
from .errors import (DimensionMismatch, EmptyWindow, NearSingular, NotNormal,
                     OffsetOutOfRange, PatternViolation, PreconditionViolated,
                     ZeroLambda)
from .operator_model import DirectSum, Normal, PositiveMap, operator_of, spectral_window

STRUCT_TOL = 1e-10


def conjugated_power(A: PositiveMap, L, lam, n: int, mask=None) -> np.ndarray:
    """``lam^-n A^n L A^-n`` (``n`` may be negative).

    ``mask`` (eigen-coordinates) drops entries outside it first, so that
    roundoff in the basis change is not amplified by the powers.
    """
    lt = A.to_eigen(np.asarray(L, dtype=complex)) @ A.eigenvectors
    if mask is not None:
        lt = np.where(mask, lt, 0.0)
    a = A.eigenvalues
    factor = (a[:, None] / a[None, :]) ** n * complex(lam) ** (-n)
    return A.eigenvectors @ (lt * factor) @ A.eigenvectors.conj().T


@dataclass(frozen=True, eq=False)
class BandedIntertwiner:
    """Lower-triangular banded operator on the unilateral grid ``0..n_blocks-1``.

    ``bands[m]`` lists the blocks at ``(j + m, j)`` for ``j = 0, 1, ...``;
    ``seeds[m]`` is the matrix ``L`` the band was generated from.
    """

    lam: complex
    A: PositiveMap
    n_blocks: int
    bands: dict
    seeds: dict

    def __post_init__(self):
        if any(m < 0 for m in self.bands):
            raise OffsetOutOfRange("banded intertwiners only carry offsets >= 0")
        for m, blocks in self.bands.items():
            if len(blocks) != self.n_blocks - m:
                raise DimensionMismatch(f"band {m} has {len(blocks)} blocks, expected {self.n_blocks - m}")

    @property
    def base(self) -> BlockOperator:
        ix = tuple(range(self.n_blocks))
        blocks = {}
        for m, band in self.bands.items():
            for j, b in enumerate(band):
                blocks[(j + m, j)] = b
        return BlockOperator(self.A.dim, self.A.dim, ix, ix, blocks)

    def recurrence_residual(self) -> float:
        """``max ||A X_n - lam X_{n+1} A||`` over consecutive blocks of every band."""
        a = self.A.entries
        worst = 0.0
        for band in self.bands.values():
            for x0, x1 in zip(band, band[1:]):
                worst = max(worst, float(np.linalg.norm(a @ x0 - self.lam * x1 @ a, 2)))
        return worst

    def to_json(self) -> dict:
        from .operator_model import matrix_to_json
        return {
            "lambda": [self.lam.real, self.lam.imag],
            "bands": {str(m): [matrix_to_json(b) for b in band]
                      for m, band in sorted(self.bands.items())},
        }


def render_diagonal(A: PositiveMap, L, lam, n_blocks: int) -> BlockOperator:
    """``D_{A,L,lam}`` on ``n_blocks`` blocks with no membership check."""
    if lam == 0:
        raise ZeroLambda("lambda must be nonzero")
    ix = tuple(range(n_blocks))
    return BlockOperator(A.dim, A.dim, ix, ix,
                         {(n, n): conjugated_power(A, L, lam, n) for n in ix})


def diag_construction(A: PositiveMap, L, lam, n_blocks: int) -> BandedIntertwiner:
    """The diagonal extended eigenvector ``D_{A,L,lam}`` of ``A (x) S``.

    Raises
    ------
    ZeroLambda
        If ``lam == 0``.
    PatternViolation
        If ``L`` is not in ``A_|lam|(A)``; the blocks would grow without bound.
    """
    lam = complex(lam)
    if lam == 0:
        raise ZeroLambda("lambda must be nonzero")
    L = np.asarray(L, dtype=complex)
    cert = alambda.membership(L, A, A, abs(lam))
    if not cert.member:
        raise PatternViolation(f"seed not in A_|lambda| (worst entry {cert.worst_entry})")
    mask = alambda.pattern_for(A, A, abs(lam)).mask
    band = tuple(conjugated_power(A, L, lam, n, mask) for n in range(n_blocks))
    return BandedIntertwiner(lam, A, n_blocks, {0: band}, {0: L})


def shifted_construction(m: int, base: BandedIntertwiner) -> BandedIntertwiner:
    """``(I (x) S^m) X``: every band moves ``m`` blocks down."""
    if m < 0 or m >= base.n_blocks:
        raise OffsetOutOfRange(f"shift {m} outside 0..{base.n_blocks - 1}")
    n = base.n_blocks
    bands, seeds = {}, {}
    for k, band in base.bands.items():
        if k + m < n:
            bands[k + m] = band[: n - k - m]
            seeds[k + m] = base.seeds.get(k, band[0])
    return BandedIntertwiner(base.lam, base.A, n, bands, seeds)


def _normal_eigen(R):
    """``(Q, mu)`` with ``R = Q diag(mu) Q*`` for the accepted normal inputs."""
    if isinstance(R, Normal):
        return np.eye(R.dim, dtype=complex), np.array(R.mu)
    if isinstance(R, PositiveMap):
        return R.eigenvectors, R.eigenvalues.astype(complex)
    r = np.asarray(R, dtype=complex)
    if r.ndim == 1:
        return np.eye(len(r), dtype=complex), r
    if r.ndim != 2 or r.shape[0] != r.shape[1]:
        raise DimensionMismatch("R must be square")
    import scipy.linalg as sla
    t, z = sla.schur(r, output="complex")
    off = t - np.diag(np.diag(t))
    if np.linalg.norm(off) > 1e-10 * max(np.linalg.norm(t), 1.0):
        raise NotNormal("R must be normal")
    return z, np.diag(t)


def intertwiner_from_seed(R, A: PositiveMap, lam, L, n_blocks: int) -> list:
    """Columns ``X_n = lam^-n R^n L A^-n`` of a solution of ``R X = lam X (A (x) S)``.

    ``R`` is normal: a :class:`Normal`, a 1-D array of eigenvalues, a normal
    matrix or a :class:`PositiveMap`.
    """
    lam = complex(lam)
    if lam == 0:
        raise ZeroLambda("lambda must be nonzero")
    q, mu = _normal_eigen(R)
    L = np.atleast_2d(np.asarray(L, dtype=complex))
    if L.shape != (len(mu), A.dim):
        raise DimensionMismatch(f"L has shape {L.shape}, expected {(len(mu), A.dim)}")
    r_mod = PositiveMap.from_matrix((q * np.abs(mu)) @ q.conj().T)
    cert = alambda.membership(L, r_mod, A, abs(lam))
    if not cert.member:
        raise PatternViolation(f"seed not in A_|lambda|(R, A) (worst entry {cert.worst_entry})")
    a = A.eigenvalues
    keep = np.abs(mu)[:, None] <= abs(lam) * a[None, :] * (1 + alambda.RATIO_SLACK)
    lt = np.where(keep, q.conj().T @ L @ A.eigenvectors, 0.0)
    cols = []
    for n in range(n_blocks):
        factor = (mu[:, None] ** n) / (a[None, :] ** n) * lam ** (-n)
        cols.append(q @ (lt * factor) @ A.eigenvectors.conj().T)
    return cols


@dataclass(frozen=True, eq=False)
class BandDecomposition:
    bands: dict
    conforming: bool
    layout: dict

    def reassemble(self) -> BlockOperator:
        blocks = {}
        cols = self.layout["col_indices"]
        rows = set(self.layout["row_indices"])
        for d, band in self.bands.items():
            js = [j for j in cols if j + d in rows]
            for j, b in zip(js, band):
                if np.any(b):
                    blocks[(j + d, j)] = b
        return BlockOperator(blocks=blocks, **self.layout)


def band_decompose(X: BlockOperator) -> BandDecomposition:
    """Split ``X`` into diagonal bands keyed by ``row - col``.

    ``conforming`` is true when every band with negative offset (above the
    diagonal) vanishes within ``1e-10 ||X||``.
    """
    if X.head_row or X.head_col or X.row_indices != X.col_indices:
        raise DimensionMismatch("band_decompose needs a square block grid without head summand")
    rows = set(X.row_indices)
    offsets = sorted({i - j for (i, j) in X.blocks})
    bands = {}
    for d in offsets:
        js = [j for j in X.col_indices if j + d in rows]
        bands[d] = tuple(X.block(j + d, j) for j in js)
    scale = X.norm()
    conforming = all(
        max(np.linalg.norm(b, 2) for b in band) <= STRUCT_TOL * scale
        for d, band in bands.items() if d < 0
    ) if scale else True
    return BandDecomposition(bands, conforming, X.layout())


def fejer_distances(X: BlockOperator, n_max: int) -> np.ndarray:
    """``||X - sum_k (1 - k/(n+1)) X(k)||_F`` for ``n = 0..n_max`` (diagnostic).

    Sums over the lower bands ``k >= 0`` of a conforming ``X``.
    """
    dec = band_decompose(X)
    norms = {d: np.sqrt(sum(np.linalg.norm(b) ** 2 for b in band))
             for d, band in dec.bands.items() if d >= 0}
    out = np.empty(n_max + 1)
    for n in range(n_max + 1):
        # bands are disjoint, so the Frobenius distance splits per band
        out[n] = np.sqrt(sum((min(1.0, k / (n + 1)) * v) ** 2 for k, v in norms.items()))
    return out


def modulation_operator(alpha, block_dim: int, n: int, bilateral: bool = False) -> BlockOperator:
    """``J_alpha``: diagonal blocks ``alpha^i I``.

    Unilateral grids ``0..n-1`` need ``|alpha| <= 1``; bilateral grids
    ``-n..n`` need ``|alpha| = 1``.
    """
    alpha = complex(alpha)
    if bilateral:
        if abs(abs(alpha) - 1) > 1e-12:
            raise PreconditionViolated("bilateral modulation needs |alpha| = 1")
        ix = tuple(range(-n, n + 1))
    else:
        if abs(alpha) > 1 + 1e-12:
            raise PreconditionViolated("unilateral modulation needs |alpha| <= 1")
        ix = tuple(range(n))
    eye = np.eye(block_dim)
    return BlockOperator(block_dim, block_dim, ix, ix, {(i, i): alpha ** i * eye for i in ix})


@dataclass(frozen=True, eq=False)
class TensorWitness:
    X: np.ndarray
    lam: complex
    residual: float


def _residual(T, X, lam):
    return float(np.linalg.norm(T @ X - lam * X @ T, 2))


def _dense(M):
    return M.to_dense() if isinstance(M, BlockOperator) else np.asarray(M, dtype=complex)


def tensor_eigenvector(X1, X2, T1, T2, l1, l2, tol: float = 1e-10) -> TensorWitness:
    """``X1 (x) X2`` as an extended eigenvector of ``T1 (x) T2`` for ``l1 l2``."""
    x1, x2, t1, t2 = map(_dense, (X1, X2, T1, T2))
    for t, x, l, name in ((t1, x1, l1, "first"), (t2, x2, l2, "second")):
        scale = max(1.0, np.linalg.norm(t, 2) * np.linalg.norm(x, 2) * max(1.0, abs(l)))
        if _residual(t, x, l) > tol * scale:
            raise PreconditionViolated(f"{name} factor is not an extended eigenvector")
    X = np.kron(x1, x2)
    T = np.kron(t1, t2)
    lam = complex(l1) * complex(l2)
    return TensorWitness(X, lam, _residual(T, X, lam))


def spectral_window_witness(R_modulus: PositiveMap, A: PositiveMap, eps: float) -> np.ndarray:
    """Rank-one ``L = a b*`` from the bottom of ``|R|`` and the top of ``A``.

    ``L`` lies in ``A_r(R, A)`` for ``r = (m_R + eps) / (||A|| - eps)``.
    """
    if not 0 <= eps < A.norm:
        raise PreconditionViolated(f"need 0 <= eps < ||A|| = {A.norm}")
    low = spectral_window(R_modulus, R_modulus.m, R_modulus.m + eps)
    high = spectral_window(A, A.norm - eps, A.norm)
    if low.shape[1] == 0 or high.shape[1] == 0:
        raise EmptyWindow("a spectral window holds no eigenvalue")
    a, b = low[:, 0], high[:, -1]
    return np.outer(a, b.conj())


def assemble_quasinormal_eigvec(U, V0, W: BandedIntertwiner, spec: DirectSum, lam,
                                tol: float = 1e-10) -> BlockOperator:
    """``[[U, V], [0, W]]`` for ``R = N (+) (A (x) S)``.

    ``V`` has columns ``lam^-n N^n V0 A^-n``. Validated: ``U`` solves the
    normal equation, ``V0`` is in ``A_|lam|(|N|, A)``, ``W`` is a banded
    construction for ``lam`` on the pure grid.
    """
    lam = complex(lam)
    if lam == 0:
        raise ZeroLambda("lambda must be nonzero")
    nmat = spec.normal.matrix
    e, d = spec.normal.dim, spec.pure.A.dim
    n_blocks = spec.pure.shift.n
    U = np.atleast_2d(np.asarray(U, dtype=complex))
    V0 = np.atleast_2d(np.asarray(V0, dtype=complex))
    if U.shape != (e, e) or V0.shape != (e, d):
        raise DimensionMismatch("U or V0 has the wrong shape")
    scale = max(1.0, np.linalg.norm(nmat, 2) * np.linalg.norm(U, 2) * max(1.0, abs(lam)))
    if _residual(nmat, U, lam) > tol * scale:
        raise PatternViolation("U is not an extended eigenvector of the normal part")
    if W.n_blocks != n_blocks or W.A.dim != d or abs(W.lam - lam) > 1e-12 * abs(lam):
        raise PatternViolation("W does not match the pure part or lambda")
    if W.recurrence_residual() > tol * max(1.0, W.A.norm * max(
            (np.linalg.norm(b, 2) for band in W.bands.values() for b in band), default=0.0)):
        raise PatternViolation("W violates the band recurrence")
    cols = intertwiner_from_seed(spec.normal, spec.pure.A, lam, V0, n_blocks)
    w = W.base
    blocks = dict(w.blocks)
    blocks[(HEAD, HEAD)] = U
    for n, v in enumerate(cols):
        blocks[(HEAD, n)] = v
    X = BlockOperator(d, d, w.row_indices, w.col_indices, blocks, e, e)
    check_quasinormal_structure(X, spec)
    res = verify_intertwining(operator_of(spec), X, operator_of(spec), lam)
    if res.interior > 1e-9 * max(1.0, X.norm()):
        raise PatternViolation(f"assembled operator has interior residual {res.interior:.3e}")
    return X


def check_quasinormal_structure(X, spec: DirectSum, tol: float = STRUCT_TOL) -> None:
    """Raise :class:`PatternViolation` unless the lower-left corner vanishes."""
    from .sylvester_oracle import subnormal_corner_check
    if not subnormal_corner_check(spec, X, tol=tol):
        raise PatternViolation("lower-left corner (pure rows, normal columns) must vanish")


def conjugate_intertwiner(X, U):
    """``U X U^-1``. Solutions for ``S`` become solutions for ``U S U^-1``."""
    u = np.asarray(U, dtype=complex)
    x = _dense(X)
    if u.shape != (x.shape[0], x.shape[0]) or x.shape[0] != x.shape[1]:
        raise DimensionMismatch("U must be square and match X")
    cond = np.linalg.cond(u)
    if not cond < 1e8:
        raise NearSingular(f"condition number {cond:.3e} >= 1e8")
    out = np.linalg.solve(u.T, (u @ x).T).T
    return X.like(out) if isinstance(X, BlockOperator) else out


@dataclass(frozen=True)
class IntertwiningResidual:
    interior: float
    boundary: float


def verify_intertwining(T1, X, T2, lam) -> IntertwiningResidual:
    """Largest block norm of ``T1 X - lam X T2``, split into interior and boundary blocks."""
    T1, X, T2 = as_block(T1), as_block(X), as_block(T2)
    if T1.shape[1] != X.shape[0] or X.shape[1] != T2.shape[0]:
        raise DimensionMismatch(f"incompatible shapes {T1.shape}, {X.shape}, {T2.shape}")
    d = T1.to_dense() @ X.to_dense() - lam * X.to_dense() @ T2.to_dense()
    D = BlockOperator.from_dense(d, **T1.product_layout(T2))
    interior = boundary = 0.0
    for (i, j), b in D.blocks.items():
        nb = float(np.linalg.norm(b, 2))
        if D.is_interior(i, j):
            interior = max(interior, nb)
        else:
            boundary = max(boundary, nb)
    return IntertwiningResidual(interior, boundary)
