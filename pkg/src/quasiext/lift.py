"""Lifting intertwiners of ``A (x) S`` to the extension ``A (x) U``.

An intertwiner lifts when it commutes with both polar factors (up to
``|lambda|`` and the phase ``lambda / |lambda|``). Truncated grids carry
boundary blocks, so every residual here is taken over interior blocks only.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from . import alambda
from .blocks import BlockOperator, as_block, block_diagonal
from .eigvec_construct import BandedIntertwiner, conjugated_power
from .errors import NotLiftable, NotQuasinormal, Unclassifiable, ZeroLambda
from .operator_model import PositiveMap, ShiftKind, build_tensor_shift, polar_decompose, quasinormality_residual

LIFT_TOL = 1e-9
QUASINORMAL_TOL = 1e-10


@dataclass(frozen=True)
class LiftReport:
    partial_isometry_residual: float
    modulus_residual: float
    liftable: bool
    case: Union[int, str] = "not_applicable"

    def to_json(self) -> dict:
        return {"partial_isometry_residual": self.partial_isometry_residual,
                "modulus_residual": self.modulus_residual,
                "liftable": self.liftable, "case": self.case}


def _interior_max(D: BlockOperator) -> float:
    out = 0.0
    for (i, j), b in D.blocks.items():
        if D.is_interior(i, j):
            out = max(out, float(np.linalg.norm(b, 2)))
    return out


def _twisted_residual(T1: BlockOperator, X: BlockOperator, T2: BlockOperator, c) -> float:
    d = T1.to_dense() @ X.to_dense() - c * X.to_dense() @ T2.to_dense()
    return _interior_max(BlockOperator.from_dense(d, **T1.product_layout(T2)))


def lift_conditions(X, T1, T2) -> LiftReport:
    """Check ``V1 X = X V2`` and ``|T1| X = X |T2|`` on interior blocks."""
    X, T1, T2 = as_block(X), as_block(T1), as_block(T2)
    for name, T in (("T1", T1), ("T2", T2)):
        q = quasinormality_residual(T)
        if q > QUASINORMAL_TOL * max(1.0, T.norm() ** 2):
            raise NotQuasinormal(f"{name} has quasinormality residual {q:.3e}")
    v1, p1 = polar_decompose(T1)
    v2, p2 = polar_decompose(T2)
    iso = _twisted_residual(v1, X, v2, 1.0)
    mod = _twisted_residual(p1, X, p2, 1.0)
    scale = max(1.0, X.norm() * max(T1.norm(), T2.norm()))
    return LiftReport(iso, mod, bool(iso <= LIFT_TOL * scale and mod <= LIFT_TOL * scale))


def _grid_factors(X: BlockOperator, A: PositiveMap):
    ix = X.row_indices
    if X.head_row or X.head_col or ix != X.col_indices or X.block_dim_row != A.dim:
        raise ValueError("X must live on the square block grid of A (x) S")
    a_eye = block_diagonal([A.entries] * len(ix), ix)
    shift = build_tensor_shift(np.eye(A.dim), ShiftKind("bilateral" if X.bilateral else "unilateral",
                                                        (len(ix) - 1) // 2 if X.bilateral else len(ix)))
    return a_eye, shift


def lift_conditions_lambda(X, A: PositiveMap, lam) -> LiftReport:
    """Check ``(A (x) I) X = |lam| X (A (x) I)`` and ``(I (x) S) X = (lam/|lam|) X (I (x) S)``."""
    lam = complex(lam)
    if lam == 0:
        raise ZeroLambda("lambda must be nonzero")
    if isinstance(X, BandedIntertwiner):
        X = X.base
    a_eye, shift = _grid_factors(X, A)
    mod = _twisted_residual(a_eye, X, a_eye, abs(lam))
    iso = _twisted_residual(shift, X, shift, lam / abs(lam))
    scale = max(1.0, X.norm() * A.norm)
    return LiftReport(iso, mod, bool(iso <= LIFT_TOL * scale and mod <= LIFT_TOL * scale))


def build_extension(X: BandedIntertwiner, A: PositiveMap, lam, half_width: int) -> BlockOperator:
    """The bilateral operator on ``-M..M`` extending a liftable banded ``X``.

    Nonnegative columns reuse the stored blocks of ``X``; the rest continue
    each band with ``lam^-i A^i L A^-i``.
    """
    lam = complex(lam)
    if lam == 0:
        raise ZeroLambda("lambda must be nonzero")
    report = lift_conditions_lambda(X, A, lam)
    if not report.liftable:
        raise NotLiftable(f"lift conditions fail (residuals {report.partial_isometry_residual:.3e}, "
                          f"{report.modulus_residual:.3e})")
    for k, L in X.seeds.items():
        if not alambda.bilateral_membership(L, A, abs(lam)):
            raise NotLiftable(f"seed of band {k} does not satisfy A L = |lambda| L A")
    M = int(half_width)
    ix = tuple(range(-M, M + 1))
    mask = alambda.bilateral_mask(A, abs(lam))
    blocks = {}
    for k, band in X.bands.items():
        L = X.seeds[k]
        for i in ix:
            if i + k > M:
                break
            blocks[(i + k, i)] = band[i] if 0 <= i < len(band) else conjugated_power(A, L, lam, i, mask)
    return BlockOperator(A.dim, A.dim, ix, ix, blocks)


def restrict_nonnegative(X: BlockOperator) -> BlockOperator:
    """Compression of a bilateral operator to the indices ``>= 0``."""
    rows = tuple(i for i in X.row_indices if i >= 0)
    cols = tuple(j for j in X.col_indices if j >= 0)
    blocks = {(i, j): b for (i, j), b in X.blocks.items() if i >= 0 and j >= 0}
    return BlockOperator(X.block_dim_row, X.block_dim_col, rows, cols, blocks)


def hardy_invariant(X: BlockOperator, tol: float = 1e-12) -> bool:
    """Whether ``X`` maps the nonnegative indices into themselves.

    Without this, no operator on the nonnegative part has ``X`` as an
    extension.
    """
    scale = X.norm()
    leak = max((np.linalg.norm(b, 2) for (i, j), b in X.blocks.items() if i < 0 <= j), default=0.0)
    return bool(leak <= tol * scale) if scale else True


def classify_lift_case(lam, A: PositiveMap, L, band_offsets) -> int:
    """Which of the four lifting situations ``(lam, L, offsets)`` falls in.

    1. ``|lam|`` in ``[1/a, a]`` and ``A L = |lam| L A``: extends.
    2. ``|lam|`` in ``[1/a, a]``, ``L`` in ``A_|lam|`` only: no extension.
    3. Some band offset is negative (above the diagonal): a bilateral
       object with no bounded counterpart on the nonnegative part.
    4. ``|lam| > a`` with ``L`` in ``A_|lam|``: no extension.

    ``a = ||A|| ||A^-1||``.
    """
    lam = complex(lam)
    if lam == 0:
        raise ZeroLambda("lambda must be nonzero")
    L = np.atleast_2d(np.asarray(L, dtype=complex))
    if not np.any(L):
        raise Unclassifiable("L must be nonzero")
    if any(int(k) < 0 for k in band_offsets):
        return 3
    a = A.condition
    r = abs(lam)
    lo, hi = 1.0 / a, a
    slack = alambda.RATIO_SLACK
    member = alambda.membership(L, A, A, r).member
    if lo * (1 - slack) <= r <= hi * (1 + slack):
        if alambda.bilateral_membership(L, A, r):
            return 1
        if member:
            return 2
    elif r > hi and member:
        return 4
    raise Unclassifiable(f"|lambda| = {r} with this L fits none of the cases (a = {a})")


@dataclass(frozen=True)
class EmbryResult:
    max_ratio: float
    holds: bool
    c_est: float
    min_form: float

    def to_json(self) -> dict:
        return {"max_ratio": self.max_ratio, "holds": self.holds,
                "c_est": self.c_est, "min_form": self.min_form}


def _support_limit(X: BlockOperator, T1: BlockOperator, n: int):
    """Rows of vectors whose images stay off the truncation edge, or ``None``."""
    if len(T1.row_indices) <= 1:
        return None
    offsets = [i - j for (i, j) in X.blocks if i is not None and j is not None]
    k = max(offsets, default=0)
    last = max(T1.row_indices) - n - max(k, 0)
    if last < min(T1.row_indices):
        raise ValueError("grid too small for this set_size")
    sl = [T1.row_slices[lbl] for lbl in T1.row_labels if lbl is None or lbl <= last]
    return np.concatenate([np.arange(s.start, s.stop) for s in sl])


def embry_condition_check(X, T1, T2, trials: int = 20, set_size: int = 3,
                          seed: int = 0) -> EmbryResult:
    """Sample the positivity inequality behind lifting (a diagnostic only).

    For random ``x_0..x_n`` compares
    ``sum <T1^i X x_j, T1^j X x_i>`` with ``sum <T2^i x_j, T2^j x_i>``.
    Vectors are supported where ``n`` steps of the shift stay on the grid,
    so the truncation does not enter. A true ``holds`` is evidence, not
    proof; a false one refutes only the sampled sets.
    """
    if not 0 <= set_size <= 6:
        raise ValueError("set_size must be in 0..6")
    X, T1, T2 = as_block(X), as_block(T1), as_block(T2)
    x, t1, t2 = X.to_dense(), T1.to_dense(), T2.to_dense()
    n = set_size
    support = _support_limit(X, T1, n)
    rng = np.random.default_rng(seed)
    dim = t2.shape[0]
    c_est = float(np.linalg.norm(x, 2) ** 2)
    max_ratio, min_form = 0.0, np.inf
    holds = True
    for _ in range(trials):
        vs = np.zeros((n + 1, dim), dtype=complex)
        idx = np.arange(dim) if support is None else support
        vs[:, idx] = rng.standard_normal((n + 1, len(idx))) + 1j * rng.standard_normal((n + 1, len(idx)))
        p1 = _powers(t1, x @ vs.T, n)
        p2 = _powers(t2, vs.T, n)
        f1 = _form(p1, n)
        f2 = _form(p2, n)
        scale = max(1.0, float(np.sum(np.abs(p2) ** 2)))
        min_form = min(min_form, f1 / scale, f2 / scale)
        if f1 < -1e-9 * scale or f2 < -1e-9 * scale:
            holds = False
        if f2 > 1e-12 * scale:
            ratio = f1 / f2
            max_ratio = max(max_ratio, ratio)
            if ratio > c_est * (1 + 1e-6):
                holds = False
    return EmbryResult(float(max_ratio), holds, c_est, float(min_form))


def _powers(t, cols, n):
    """``out[i][:, j] = t^i cols[:, j]``."""
    out = [cols]
    for _ in range(n):
        out.append(t @ out[-1])
    return np.array(out)


def _form(p, n):
    # sum_{i,j} <T^i x_j, T^j x_i>
    total = 0.0 + 0.0j
    for i in range(n + 1):
        for j in range(n + 1):
            total += np.vdot(p[j][:, i], p[i][:, j])
    return float(total.real)
