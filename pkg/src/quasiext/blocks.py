"""Dense complex block matrices indexed by shift position.

A :class:`BlockOperator` is a matrix partitioned into square-ish blocks whose
rows and columns carry integer labels (the position in the shift grid,
``0..N-1`` for the unilateral model and ``-M..M`` for the bilateral one).
An optional unlabelled leading summand (``HEAD``) holds the normal part of
a direct sum ``N (+) T``; it is placed before all labelled blocks.

Only nonzero blocks are stored. Arithmetic goes through the dense form,
which is fine at the sizes this package targets (total dimension <= 64).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional, Sequence

import numpy as np

from .errors import DimensionMismatch

#: Label of the normal summand in a direct-sum layout.
HEAD = None

Label = Optional[int]


def _slices(indices, bdim, head):
    out = {}
    pos = 0
    if head:
        out[HEAD] = slice(0, head)
        pos = head
    for i in indices:
        out[i] = slice(pos, pos + bdim)
        pos += bdim
    return out, pos


@dataclass(frozen=True, eq=False)
class BlockOperator:
    block_dim_row: int
    block_dim_col: int
    row_indices: tuple
    col_indices: tuple
    blocks: Mapping = field(default_factory=dict)
    head_row: int = 0
    head_col: int = 0

    def __post_init__(self):
        object.__setattr__(self, "row_indices", tuple(int(i) for i in self.row_indices))
        object.__setattr__(self, "col_indices", tuple(int(i) for i in self.col_indices))
        rows = set(self.row_indices) | ({HEAD} if self.head_row else set())
        cols = set(self.col_indices) | ({HEAD} if self.head_col else set())
        clean = {}
        for (i, j), b in dict(self.blocks).items():
            if i not in rows or j not in cols:
                raise DimensionMismatch(f"block ({i}, {j}) outside the index range")
            b = np.asarray(b, dtype=complex)
            if b.shape != (self._row_size(i), self._col_size(j)):
                raise DimensionMismatch(
                    f"block ({i}, {j}) has shape {b.shape}, expected "
                    f"{(self._row_size(i), self._col_size(j))}"
                )
            b = b.copy()
            b.setflags(write=False)
            clean[(i, j)] = b
        object.__setattr__(self, "blocks", clean)

    # -- layout -----------------------------------------------------------
    def _row_size(self, i):
        return self.head_row if i is HEAD else self.block_dim_row

    def _col_size(self, j):
        return self.head_col if j is HEAD else self.block_dim_col

    @property
    def row_labels(self) -> tuple:
        return ((HEAD,) if self.head_row else ()) + self.row_indices

    @property
    def col_labels(self) -> tuple:
        return ((HEAD,) if self.head_col else ()) + self.col_indices

    @property
    def row_slices(self):
        return _slices(self.row_indices, self.block_dim_row, self.head_row)[0]

    @property
    def col_slices(self):
        return _slices(self.col_indices, self.block_dim_col, self.head_col)[0]

    @property
    def shape(self) -> tuple:
        return (
            self.head_row + self.block_dim_row * len(self.row_indices),
            self.head_col + self.block_dim_col * len(self.col_indices),
        )

    @property
    def bilateral(self) -> bool:
        return any(i < 0 for i in self.row_indices + self.col_indices)

    def layout(self) -> dict:
        return dict(
            block_dim_row=self.block_dim_row,
            block_dim_col=self.block_dim_col,
            row_indices=self.row_indices,
            col_indices=self.col_indices,
            head_row=self.head_row,
            head_col=self.head_col,
        )

    # -- access -----------------------------------------------------------
    def block(self, i: Label, j: Label) -> np.ndarray:
        b = self.blocks.get((i, j))
        if b is None:
            return np.zeros((self._row_size(i), self._col_size(j)), dtype=complex)
        return b

    def nonzero_blocks(self) -> Iterator:
        for key in sorted(self.blocks, key=_label_key):
            yield key, self.blocks[key]

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=complex)
        rs, cs = self.row_slices, self.col_slices
        for (i, j), b in self.blocks.items():
            out[rs[i], cs[j]] = b
        return out

    @classmethod
    def from_dense(cls, dense, block_dim_row, block_dim_col, row_indices,
                   col_indices, head_row=0, head_col=0, atol=0.0) -> "BlockOperator":
        dense = np.asarray(dense, dtype=complex)
        rs, nr = _slices(row_indices, block_dim_row, head_row)
        cs, nc = _slices(col_indices, block_dim_col, head_col)
        if dense.shape != (nr, nc):
            raise DimensionMismatch(f"dense shape {dense.shape} does not match layout {(nr, nc)}")
        blocks = {}
        for i, r in rs.items():
            for j, c in cs.items():
                b = dense[r, c]
                if b.size and np.max(np.abs(b)) > atol:
                    blocks[(i, j)] = b
        return cls(block_dim_row, block_dim_col, tuple(row_indices), tuple(col_indices),
                   blocks, head_row, head_col)

    def like(self, dense, atol=0.0) -> "BlockOperator":
        """Wrap ``dense`` using this operator's layout."""
        return BlockOperator.from_dense(dense, atol=atol, **self.layout())

    def product_layout(self, other: "BlockOperator") -> dict:
        return dict(
            block_dim_row=self.block_dim_row,
            block_dim_col=other.block_dim_col,
            row_indices=self.row_indices,
            col_indices=other.col_indices,
            head_row=self.head_row,
            head_col=other.head_col,
        )

    # -- arithmetic -------------------------------------------------------
    def __matmul__(self, other):
        if isinstance(other, BlockOperator):
            if self.shape[1] != other.shape[0]:
                raise DimensionMismatch(f"cannot multiply {self.shape} by {other.shape}")
            return BlockOperator.from_dense(self.to_dense() @ other.to_dense(),
                                            **self.product_layout(other))
        return self.to_dense() @ other

    def __add__(self, other):
        _same_layout(self, other)
        return self.like(self.to_dense() + other.to_dense())

    def __sub__(self, other):
        _same_layout(self, other)
        return self.like(self.to_dense() - other.to_dense())

    def __mul__(self, scalar):
        return self.like(self.to_dense() * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def adjoint(self) -> "BlockOperator":
        return BlockOperator.from_dense(
            self.to_dense().conj().T,
            block_dim_row=self.block_dim_col,
            block_dim_col=self.block_dim_row,
            row_indices=self.col_indices,
            col_indices=self.row_indices,
            head_row=self.head_col,
            head_col=self.head_row,
        )

    def norm(self) -> float:
        """Operator (spectral) norm."""
        if not self.blocks:
            return 0.0
        return float(np.linalg.norm(self.to_dense(), 2))

    def is_interior(self, i: Label, j: Label) -> bool:
        """Whether block ``(i, j)`` is free of truncation effects.

        Unilateral grids: row above the first index and column below the
        last. Bilateral grids: neither index at either extreme. The head
        summand is never a boundary. A single-index grid is a plain matrix
        and has no boundary.
        """
        if len(self.row_indices) <= 1 and len(self.col_indices) <= 1:
            return True
        if self.bilateral:
            rows = (min(self.row_indices), max(self.row_indices))
            cols = (min(self.col_indices), max(self.col_indices))
            return (i is HEAD or i not in rows) and (j is HEAD or j not in cols)
        row_ok = i is HEAD or i > min(self.row_indices)
        col_ok = j is HEAD or j < max(self.col_indices)
        return row_ok and col_ok

    def __repr__(self):
        return (f"BlockOperator(shape={self.shape}, rows={_span(self.row_indices)}, "
                f"cols={_span(self.col_indices)}, head=({self.head_row}, {self.head_col}), "
                f"nonzero={len(self.blocks)})")


def _span(ix):
    return f"{ix[0]}..{ix[-1]}" if ix else "-"


def _label_key(key):
    i, j = key
    return (i is not HEAD, i if i is not HEAD else 0, j is not HEAD, j if j is not HEAD else 0)


def _same_layout(a, b):
    if not isinstance(b, BlockOperator) or a.layout() != b.layout():
        raise DimensionMismatch("operands have different block layouts")


def as_block(matrix) -> BlockOperator:
    """Wrap a plain matrix as a single-block operator (label 0)."""
    if isinstance(matrix, BlockOperator):
        return matrix
    m = np.atleast_2d(np.asarray(matrix, dtype=complex))
    return BlockOperator(m.shape[0], m.shape[1], (0,), (0,), {(0, 0): m})


def block_diagonal(blocks: Sequence[np.ndarray], indices: Sequence[int]) -> BlockOperator:
    bl = [np.asarray(b, dtype=complex) for b in blocks]
    r, c = bl[0].shape
    return BlockOperator(r, c, tuple(indices), tuple(indices),
                         {(i, i): b for i, b in zip(indices, bl)})


def identity_like(indices, block_dim, head=0) -> BlockOperator:
    blocks = {(i, i): np.eye(block_dim) for i in indices}
    if head:
        blocks[(HEAD, HEAD)] = np.eye(head)
    return BlockOperator(block_dim, block_dim, tuple(indices), tuple(indices), blocks, head, head)
