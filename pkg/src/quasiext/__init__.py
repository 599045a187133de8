"""Extended eigenvalues of quasinormal operators in the block model ``A (x) S``.

Modules
-------
operator_model
    Positive maps, shift models, polar decomposition, JSON specs.
extended_spectrum
    Closed-form regions.
alambda
    Growth-algebra membership and masks.
eigvec_construct
    Explicit extended eigenvectors.
sylvester_oracle
    Brute-force nullspaces used as ground truth.
lift
    Lifting to the bilateral extension.
"""
from .blocks import HEAD, BlockOperator
from .errors import QuasiextError
from .operator_model import DirectSum, Normal, PositiveMap, Pure, ShiftKind, SpectralProfile

__all__ = ["HEAD", "BlockOperator", "QuasiextError", "DirectSum", "Normal", "PositiveMap",
           "Pure", "ShiftKind", "SpectralProfile"]
__version__ = "0.1.0"
