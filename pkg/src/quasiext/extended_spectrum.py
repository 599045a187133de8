"""Closed-form extended-spectrum and intertwining-value regions.

Regions are finite unions of three component kinds: the complement of an
open or closed disk, an annulus with independently included boundaries,
and a finite point set. Nothing here touches an operator directly; all
formulas consume :class:`~quasiext.operator_model.SpectralProfile` data,
which is how the open-boundary cases (unreachable with finite matrices)
are exercised.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .operator_model import DirectSum, Normal, PositiveMap, Pure, SpectralProfile

BOUNDARY_TOL = 1e-12
ROUND_DIGITS = 12


@dataclass(frozen=True)
class DiskComplement:
    """``{|z| > radius}``, plus the circle ``|z| = radius`` when included."""

    radius: float
    boundary_included: bool

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")

    def contains(self, z) -> bool:
        a = abs(z)
        if abs(a - self.radius) <= BOUNDARY_TOL:
            return self.boundary_included
        return a > self.radius

    def to_json(self):
        return {"kind": "disk_complement", "radius": self.radius, "boundary": self.boundary_included}


@dataclass(frozen=True)
class Annulus:
    r_in: float
    r_out: float
    inner_included: bool
    outer_included: bool

    def __post_init__(self):
        if self.r_in > self.r_out:
            raise ValueError("r_in must not exceed r_out")

    def contains(self, z) -> bool:
        a = abs(z)
        on_in = abs(a - self.r_in) <= BOUNDARY_TOL
        on_out = abs(a - self.r_out) <= BOUNDARY_TOL
        if on_in or on_out:
            return (on_in and self.inner_included) or (on_out and self.outer_included)
        return self.r_in < a < self.r_out

    def to_json(self):
        return {"kind": "annulus", "r_in": self.r_in, "r_out": self.r_out,
                "inner": self.inner_included, "outer": self.outer_included}


@dataclass(frozen=True)
class FiniteSet:
    points: tuple

    def __post_init__(self):
        pts = tuple(complex(p) for p in self.points)
        if any(p == 0 for p in pts):
            raise ValueError("finite-set points must be nonzero")
        object.__setattr__(self, "points", pts)

    def contains(self, z) -> bool:
        z = complex(z)
        return any(abs(z - p) <= BOUNDARY_TOL * max(1.0, abs(p)) for p in self.points)

    def to_json(self):
        return {"kind": "finite_set", "points": [[p.real, p.imag] for p in self.points]}


Component = Union[DiskComplement, Annulus, FiniteSet]


@dataclass(frozen=True)
class Region:
    components: tuple

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))

    def __contains__(self, z) -> bool:
        return contains(self, z)

    def union(self, other: "Region") -> "Region":
        return Region(self.components + other.components)

    def to_json(self) -> dict:
        return {"components": [c.to_json() for c in self.components]}

    @classmethod
    def from_json(cls, payload: dict) -> "Region":
        comps = []
        for c in payload["components"]:
            kind = c["kind"]
            if kind == "disk_complement":
                comps.append(DiskComplement(float(c["radius"]), bool(c["boundary"])))
            elif kind == "annulus":
                comps.append(Annulus(float(c["r_in"]), float(c["r_out"]),
                                     bool(c["inner"]), bool(c["outer"])))
            elif kind == "finite_set":
                comps.append(FiniteSet(tuple(complex(re, im) for re, im in c["points"])))
            else:
                raise ValueError(f"unknown region component {kind!r}")
        return cls(tuple(comps))


def contains(region: Region, z) -> bool:
    return any(c.contains(z) for c in region.components)


def _profile(x) -> SpectralProfile:
    if isinstance(x, SpectralProfile):
        return x
    if isinstance(x, PositiveMap):
        return x.profile()
    if isinstance(x, Pure):
        return x.A.profile()
    if isinstance(x, Normal):
        return x.modulus.profile()
    raise TypeError(f"cannot derive a spectral profile from {type(x).__name__}")


def intertwining_region(r_profile, a_profile) -> Region:
    """Intertwining values of ``(R, A (x) S)``.

    ``r_profile`` describes ``|R|`` and ``a_profile`` describes ``A``. The
    circle of radius ``m_|R| / ||A||`` belongs to the region exactly when
    both extremes are eigenvalues.
    """
    rp, ap = _profile(r_profile), _profile(a_profile)
    if not ap.M > 0:
        raise ValueError("||A|| must be positive")
    closed = rp.m_is_eigenvalue and ap.M_is_eigenvalue
    return Region((DiskComplement(rp.m / ap.M, closed),))


def pure_extended_spectrum(spec) -> Region:
    """Extended spectrum of a pure quasinormal operator.

    Accepts a :class:`Pure` spec, a :class:`PositiveMap` (the ``A`` of the
    model) or a single :class:`SpectralProfile` of ``|T|``.
    """
    p = _profile(spec)
    closed = p.m_is_eigenvalue and p.M_is_eigenvalue
    return Region((DiskComplement(p.m / p.M, closed),))


def ratio_set(mu) -> tuple:
    """Distinct ratios ``mu_i / mu_j`` rounded to 12 significant digits of ``|z|``."""
    seen = {}
    for a in mu:
        for b in mu:
            z = complex(a) / complex(b)
            key = (_round_rel(z.real, abs(z)), _round_rel(z.imag, abs(z)))
            seen.setdefault(key, complex(*key))
    return tuple(seen[k] for k in sorted(seen))


def _round_rel(x: float, scale: float) -> float:
    if x == 0:
        return 0.0
    digits = ROUND_DIGITS - 1 - int(np.floor(np.log10(scale)))
    r = round(x, digits)
    return 0.0 if r == 0 else r


def normal_extended_spectrum(mu) -> Region:
    """Extended spectrum of a finite normal diagonal: the ratio set."""
    if isinstance(mu, Normal):
        mu = mu.mu
    mu = tuple(complex(z) for z in mu)
    if not mu or any(z == 0 for z in mu):
        raise ValueError("normal entries must be nonzero")
    return Region((FiniteSet(ratio_set(mu)),))


def _direct_sum_closed(n: SpectralProfile, t: SpectralProfile) -> bool:
    m_n, m_t = n.m, t.m
    t_ends = t.m_is_eigenvalue and t.M_is_eigenvalue
    if m_n < m_t:
        return n.m_is_eigenvalue and t.M_is_eigenvalue
    if m_n == m_t:
        return (n.m_is_eigenvalue and t.M_is_eigenvalue) or t_ends
    return t_ends


def quasinormal_region_from_profiles(n_profile, t_profile, mu=()) -> Region:
    """Extended spectrum of ``N (+) T`` from the profiles of ``|N|`` and ``|T|``.

    ``mu`` (the diagonal of ``N``) contributes its ratio set; leave it empty
    when only the continuous part is of interest.
    """
    n, t = _profile(n_profile), _profile(t_profile)
    radius = min(n.m, t.m) / t.M
    disk = DiskComplement(radius, _direct_sum_closed(n, t))
    comps = (disk,)
    if len(mu):
        comps = normal_extended_spectrum(mu).components + comps
    return Region(comps)


def quasinormal_extended_spectrum(spec: DirectSum) -> Region:
    if not isinstance(spec, DirectSum):
        raise TypeError("quasinormal_extended_spectrum needs a DirectSum spec")
    return quasinormal_region_from_profiles(spec.normal.modulus.profile(),
                                            spec.pure.A.profile(), spec.normal.mu)


def bilateral_extended_spectrum(A) -> Region:
    """Extended spectrum of ``A (x) U``: the annulus ``1/a <= |z| <= a``, ``a = ||A|| ||A^-1||``."""
    p = _profile(A)
    if not p.m > 0:
        raise ValueError("A must be invertible (m > 0)")
    a = p.M / p.m
    closed = p.m_is_eigenvalue and p.M_is_eigenvalue
    return Region((Annulus(1.0 / a, a, closed, closed),))


def extended_spectrum(spec, profile=None) -> Region:
    """Dispatch on the kind of operator (Normal, Pure or DirectSum). ``profile`` overrides the pure/|T| data."""
    if isinstance(spec, Normal):
        return normal_extended_spectrum(spec.mu)
    if isinstance(spec, Pure):
        if spec.shift.kind == "bilateral":
            return bilateral_extended_spectrum(profile or spec.A)
        return pure_extended_spectrum(profile or spec.A)
    if isinstance(spec, DirectSum):
        return quasinormal_region_from_profiles(spec.normal.modulus.profile(),
                                                profile or spec.pure.A, spec.normal.mu)
    raise TypeError(f"not a quasinormal spec: {spec!r}")


def polar_grid(region: Region, radii, angles) -> list:
    """Membership rows ``(radius, angle, member)`` ordered by radius then angle."""
    return [(float(r), float(t), int(contains(region, r * np.exp(1j * t))))
            for r in radii for t in angles]
