"""Finite models of quasinormal operators.

Pure quasinormal operators are represented as ``A (x) S`` with ``A`` a
positive-definite matrix and ``S`` a truncated unilateral shift on blocks
``0..N-1`` (``S e_{N-1} = 0``). Their minimal normal extension ``A (x) U``
lives on the bilateral grid ``-M..M``. Normal operators are finite complex
diagonals. A direct sum puts the normal part in the head summand of a
:class:`~quasiext.blocks.BlockOperator`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .blocks import HEAD, BlockOperator, as_block
from .errors import DimensionMismatch, SingularInput, ValidationError

HERMITIAN_TOL = 1e-12
SINGULAR_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class PositiveMap:
    """Hermitian positive-definite matrix with a cached eigendecomposition.

    Eigenvalues are stored ascending, so ``eigenvalues[0]`` is the lower
    spectral bound ``m_A`` and ``eigenvalues[-1]`` the norm. For a diagonal
    input the eigenvectors are an exact permutation matrix.
    """

    entries: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @classmethod
    def from_matrix(cls, matrix) -> "PositiveMap":
        m = np.atleast_2d(np.asarray(matrix, dtype=complex))
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise ValidationError("square", f"expected a nonempty square matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValidationError("finite", "matrix has non-finite entries")
        scale = np.max(np.abs(m))
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL * max(scale, 1.0):
            raise ValidationError("hermitian", "matrix is not Hermitian")
        off = m - np.diag(np.diag(m))
        if not np.any(off):
            d = np.diag(m).real
            order = np.argsort(d, kind="stable")
            vals = d[order]
            vecs = np.eye(m.shape[0], dtype=complex)[:, order]
            entries = np.diag(d).astype(complex)
        else:
            entries = (m + m.conj().T) / 2
            vals, vecs = np.linalg.eigh(entries)
        if vals[0] <= 0 or vals[0] <= 1e-14 * vals[-1]:
            raise ValidationError("positive_definite",
                                  f"smallest eigenvalue {vals[0]:.3e} is not strictly positive")
        for a in (entries, vals, vecs):
            a.setflags(write=False)
        return cls(entries, vals, vecs)

    @classmethod
    def diag(cls, values) -> "PositiveMap":
        return cls.from_matrix(np.diag(np.asarray(values, dtype=float)))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def m(self) -> float:
        """Lower spectral bound (smallest eigenvalue)."""
        return float(self.eigenvalues[0])

    @property
    def norm(self) -> float:
        return float(self.eigenvalues[-1])

    @property
    def condition(self) -> float:
        """``||A|| ||A^-1||``."""
        return self.norm / self.m

    def apply(self, f) -> np.ndarray:
        """Matrix function ``f(A)`` through the eigenbasis."""
        q = self.eigenvectors
        return (q * f(self.eigenvalues)) @ q.conj().T

    def inverse(self) -> "PositiveMap":
        vals = 1.0 / self.eigenvalues[::-1]
        vecs = self.eigenvectors[:, ::-1].copy()
        entries = (vecs * vals) @ vecs.conj().T
        for a in (entries, vals, vecs):
            a.setflags(write=False)
        return PositiveMap(entries, vals, vecs)

    def scaled(self, c: float) -> "PositiveMap":
        if c <= 0:
            raise ValueError("scale factor must be positive")
        vals = self.eigenvalues * c
        entries = self.entries * c
        vecs = self.eigenvectors.copy()
        for a in (entries, vals, vecs):
            a.setflags(write=False)
        return PositiveMap(entries, vals, vecs)

    def to_eigen(self, vector_or_matrix):
        return self.eigenvectors.conj().T @ vector_or_matrix

    def profile(self) -> "SpectralProfile":
        # finite matrices attain both spectral extremes
        return SpectralProfile(self.m, self.norm, True, True)

    def __repr__(self):
        return f"PositiveMap(dim={self.dim}, spectrum=[{self.m:.6g}, {self.norm:.6g}])"


@dataclass(frozen=True)
class SpectralProfile:
    """Spectral extremes of a positive operator and whether each is an eigenvalue.

    Finite matrices always have both flags set; the profile exists so the
    open-boundary cases of the region formulas can be exercised.
    """

    m: float
    M: float
    m_is_eigenvalue: bool = True
    M_is_eigenvalue: bool = True

    def __post_init__(self):
        if not (0 <= self.m <= self.M) or not self.M > 0:
            raise ValidationError("profile_bounds", f"need 0 <= m <= M and M > 0, got m={self.m}, M={self.M}")


@dataclass(frozen=True)
class ShiftKind:
    kind: str
    n: int

    def __post_init__(self):
        if self.kind == "unilateral":
            if self.n < 2:
                raise ValidationError("shift_size", "unilateral shift needs N >= 2 blocks")
        elif self.kind == "bilateral":
            if self.n < 1:
                raise ValidationError("shift_size", "bilateral shift needs half-width M >= 1")
        else:
            raise ValidationError("shift_kind", f"unknown shift kind {self.kind!r}")

    @classmethod
    def unilateral(cls, n_blocks: int) -> "ShiftKind":
        return cls("unilateral", int(n_blocks))

    @classmethod
    def bilateral(cls, half_width: int) -> "ShiftKind":
        return cls("bilateral", int(half_width))

    @property
    def indices(self) -> tuple:
        if self.kind == "unilateral":
            return tuple(range(self.n))
        return tuple(range(-self.n, self.n + 1))


@dataclass(frozen=True)
class Normal:
    mu: tuple

    def __post_init__(self):
        mu = tuple(complex(z) for z in self.mu)
        if not mu:
            raise ValidationError("nonempty_mu", "normal part needs at least one entry")
        if any(z == 0 for z in mu):
            raise ValidationError("nonzero_mu", "normal entries must be nonzero (injectivity)")
        object.__setattr__(self, "mu", mu)

    @property
    def dim(self) -> int:
        return len(self.mu)

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(np.array(self.mu, dtype=complex))

    @property
    def modulus(self) -> PositiveMap:
        return PositiveMap.diag(np.abs(np.array(self.mu)))


@dataclass(frozen=True)
class Pure:
    A: PositiveMap
    shift: ShiftKind


@dataclass(frozen=True)
class DirectSum:
    normal: Normal
    pure: Pure


QuasinormalSpec = Union[Normal, Pure, DirectSum]


# ---------------------------------------------------------------------------
# constructions

def build_tensor_shift(A: PositiveMap, kind: ShiftKind) -> BlockOperator:
    """``A (x) S`` (or ``A (x) U``): block ``A`` at every ``(i+1, i)`` inside the grid."""
    a = A.entries if isinstance(A, PositiveMap) else np.asarray(A, dtype=complex)
    ix = kind.indices
    blocks = {(i + 1, i): a for i in ix[:-1]}
    return BlockOperator(a.shape[0], a.shape[0], ix, ix, blocks)


def mne(spec: Pure, half_width: int) -> BlockOperator:
    """Truncated minimal normal extension ``A (x) U`` of a unilateral pure model."""
    if not isinstance(spec, Pure) or spec.shift.kind != "unilateral":
        raise ValidationError("unilateral_pure", "mne needs a pure spec with a unilateral shift")
    return build_tensor_shift(spec.A, ShiftKind.bilateral(half_width))


def operator_of(spec: QuasinormalSpec) -> BlockOperator:
    """Block operator realising a spec."""
    if isinstance(spec, Normal):
        return as_block(spec.matrix)
    if isinstance(spec, Pure):
        return build_tensor_shift(spec.A, spec.shift)
    if isinstance(spec, DirectSum):
        t = build_tensor_shift(spec.pure.A, spec.pure.shift)
        e = spec.normal.dim
        blocks = dict(t.blocks)
        blocks[(HEAD, HEAD)] = spec.normal.matrix
        return BlockOperator(t.block_dim_row, t.block_dim_col, t.row_indices, t.col_indices,
                             blocks, e, e)
    raise TypeError(f"not a quasinormal spec: {spec!r}")


def _psd_sqrt(h):
    w, v = np.linalg.eigh((h + h.conj().T) / 2)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def _shift_structured(T: BlockOperator) -> bool:
    if T.head_row != T.head_col or T.row_indices != T.col_indices or T.block_dim_row != T.block_dim_col:
        return False
    for (i, j) in T.blocks:
        if i is HEAD or j is HEAD:
            if not (i is HEAD and j is HEAD):
                return False
        elif i != j + 1:
            return False
    return len(T.row_indices) >= 2


def _column_moduli(T: BlockOperator) -> dict:
    ix = T.col_indices
    mods = {}
    for j in ix[:-1]:
        mods[j] = _psd_sqrt(T.block(j + 1, j).conj().T @ T.block(j + 1, j))
    # last column carries no block in the truncation; continue the weights
    mods[ix[-1]] = mods[ix[-2]]
    return mods


def modulus(T) -> BlockOperator | np.ndarray:
    """``|T| = (T*T)^{1/2}``.

    For a block weighted shift the modulus is block diagonal with
    ``|B_i|`` in column ``i``; the last column, which the truncation leaves
    empty, inherits the previous weight so that ``|A (x) S| = A (x) I``.
    Any other operator goes through the dense square root.
    """
    if isinstance(T, BlockOperator) and _shift_structured(T):
        mods = _column_moduli(T)
        blocks = {(j, j): mods[j] for j in T.col_indices}
        if T.head_row:
            h = T.block(HEAD, HEAD)
            blocks[(HEAD, HEAD)] = _psd_sqrt(h.conj().T @ h)
        return BlockOperator(T.block_dim_row, T.block_dim_col, T.row_indices, T.col_indices,
                             blocks, T.head_row, T.head_col)
    if isinstance(T, BlockOperator):
        d = T.to_dense()
        return T.like(_psd_sqrt(d.conj().T @ d))
    d = np.asarray(T, dtype=complex)
    return _psd_sqrt(d.conj().T @ d)


def _dense_polar(d):
    u, s, vh = np.linalg.svd(d)
    if s[-1] <= SINGULAR_TOL:
        raise SingularInput(f"smallest singular value {s[-1]:.3e} <= {SINGULAR_TOL}")
    return u @ vh, (vh.conj().T * s) @ vh


def polar_decompose(T):
    """Polar decomposition ``T = V |T|``.

    Returns ``(V, modulus)`` with the same container type as ``T``. For
    ``A (x) S`` this is exactly ``(I (x) S, A (x) I)``.

    Raises
    ------
    SingularInput
        If a weight block (or the dense matrix) has a singular value
        at or below ``1e-10``.
    """
    if isinstance(T, BlockOperator) and _shift_structured(T):
        mods = _column_moduli(T)
        vblocks = {}
        for j in T.col_indices[:-1]:
            b = T.block(j + 1, j)
            s = np.linalg.svd(b, compute_uv=False)
            if s[-1] <= SINGULAR_TOL:
                raise SingularInput(f"weight block at column {j} is singular")
            vblocks[(j + 1, j)] = b @ np.linalg.inv(mods[j])
        mblocks = {(j, j): mods[j] for j in T.col_indices}
        if T.head_row:
            v, p = _dense_polar(T.block(HEAD, HEAD))
            vblocks[(HEAD, HEAD)] = v
            mblocks[(HEAD, HEAD)] = p
        layout = T.layout()
        return BlockOperator(blocks=vblocks, **layout), BlockOperator(blocks=mblocks, **layout)
    if isinstance(T, BlockOperator):
        v, p = _dense_polar(T.to_dense())
        return T.like(v), T.like(p)
    return _dense_polar(np.asarray(T, dtype=complex))


def quasinormality_residual(T) -> float:
    """``|| T|T| - |T|T ||`` in operator norm."""
    mod = modulus(T)
    if isinstance(T, BlockOperator):
        t, p = T.to_dense(), mod.to_dense()
    else:
        t, p = np.asarray(T, dtype=complex), mod
    if t.size == 0:
        return 0.0
    return float(np.linalg.norm(t @ p - p @ t, 2))


def spectral_window(A: PositiveMap, lo: float, hi: float) -> np.ndarray:
    """Orthonormal basis (columns) of the spectral subspace of ``A`` for ``[lo, hi]``.

    The result has zero columns when no eigenvalue falls in the window.
    """
    if lo > hi:
        raise ValueError(f"empty window [{lo}, {hi}]")
    slack = HERMITIAN_TOL * A.norm
    sel = (A.eigenvalues >= lo - slack) & (A.eigenvalues <= hi + slack)
    return A.eigenvectors[:, sel]


def modulus_map(spec) -> PositiveMap:
    """``|R|`` of a normal or pure spec as a :class:`PositiveMap` on one block.

    For a pure model ``|A (x) S| = A (x) I`` so the block-level map is ``A``.
    """
    if isinstance(spec, Normal):
        return spec.modulus
    if isinstance(spec, Pure):
        return spec.A
    raise TypeError("modulus_map needs a Normal or Pure spec")


# ---------------------------------------------------------------------------
# JSON operator-spec format

def _complex_scalar(v, what):
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
        return complex(v[0], v[1])
    raise ValidationError("schema", f"{what}: expected a number or [re, im] pair, got {v!r}")


def _is_pair(v):
    return isinstance(v, (list, tuple)) and len(v) == 2 and all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in v)


def parse_matrix(value, what="matrix") -> np.ndarray:
    """Parse a complex matrix.

    Accepted forms: a flat row-major list of ``[re, im]`` pairs (length a
    perfect square), a list of rows of ``[re, im]`` pairs, or a list of
    rows of real numbers.
    """
    if not isinstance(value, (list, tuple)) or not value:
        raise ValidationError("schema", f"{what}: expected a nonempty list")
    k = len(value)
    root = math.isqrt(k)
    if all(_is_pair(v) for v in value) and root * root == k and k != 2:
        flat = [complex(v[0], v[1]) for v in value]
        return np.array(flat, dtype=complex).reshape(root, root)
    rows = []
    for r in value:
        if not isinstance(r, (list, tuple)):
            raise ValidationError("schema", f"{what}: rows must be lists")
        rows.append([_complex_scalar(x, what) for x in r])
    if len({len(r) for r in rows}) != 1:
        raise ValidationError("schema", f"{what}: ragged rows")
    return np.array(rows, dtype=complex)


def matrix_to_json(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[float(z.real), float(z.imag)] for z in m.ravel()]


def parse_spec(payload: dict):
    """Parse a JSON operator spec into ``(spec, profile_override)``.

    ``profile_override`` is a :class:`SpectralProfile` or ``None``.
    """
    if not isinstance(payload, dict):
        raise ValidationError("schema", "operator spec must be a JSON object")
    kind = payload.get("type")
    if kind not in ("pure", "normal", "direct_sum"):
        raise ValidationError("spec_type", f"unknown operator type {kind!r}")

    def normal_part():
        if "mu" not in payload:
            raise ValidationError("schema", "missing 'mu'")
        if not isinstance(payload["mu"], (list, tuple)):
            raise ValidationError("schema", "'mu' must be a list")
        return Normal(tuple(_complex_scalar(v, "mu") for v in payload["mu"]))

    def pure_part():
        if "A" not in payload:
            raise ValidationError("schema", "missing 'A'")
        A = PositiveMap.from_matrix(parse_matrix(payload["A"], "A"))
        sh = payload.get("shift", {"kind": "unilateral", "n": 8})
        if not isinstance(sh, dict) or "n" not in sh:
            raise ValidationError("schema", "'shift' must be an object with 'kind' and 'n'")
        return Pure(A, ShiftKind(sh.get("kind", "unilateral"), int(sh["n"])))

    if kind == "normal":
        spec = normal_part()
    elif kind == "pure":
        spec = pure_part()
    else:
        spec = DirectSum(normal_part(), pure_part())

    profile = None
    if "profile" in payload and payload["profile"] is not None:
        p = payload["profile"]
        try:
            profile = SpectralProfile(float(p["m"]), float(p["M"]),
                                      bool(p.get("m_point", True)), bool(p.get("M_point", True)))
        except (KeyError, TypeError) as exc:
            raise ValidationError("schema", f"bad profile: {exc}") from exc
    return spec, profile


def spec_to_json(spec: QuasinormalSpec) -> dict:
    if isinstance(spec, Normal):
        return {"type": "normal", "mu": [[z.real, z.imag] for z in spec.mu]}
    if isinstance(spec, Pure):
        return {"type": "pure", "A": matrix_to_json(spec.A.entries),
                "shift": {"kind": spec.shift.kind, "n": spec.shift.n}}
    if isinstance(spec, DirectSum):
        out = spec_to_json(spec.pure)
        out.update(type="direct_sum", mu=[[z.real, z.imag] for z in spec.normal.mu])
        return out
    raise TypeError(f"not a quasinormal spec: {spec!r}")


def check_square(m, what="matrix"):
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"{what} must be square, got shape {m.shape}")
    return m
