"""Domain types: the collocation lattice and spectral field containers.

All fields live on the periodic unit box (0,1)^3.  A field is stored as
its full complex Fourier coefficient cube in numpy ``fftn`` layout,
normalised so that the k=0 coefficient equals the grid mean.  Physical
wavenumber of integer index m is 2*pi*m.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

__all__ = [
    "Lattice",
    "SpectralField",
    "ScalarSpectralField",
    "hermitian_residual",
    "solenoidal_residual",
    "require_solenoidal",
]


@dataclass(frozen=True)
class Lattice:
    """Grid resolution and retained-mode policy.

    ``n`` points per axis (even, >= 4); modes with any axis index of
    magnitude above ``floor(dealias_fraction * n/2)`` are dropped, and the
    Nyquist slot (|index| = n/2) is always dropped because it has no
    Hermitian partner under differentiation.
    """

    n: int
    dealias_fraction: Fraction = Fraction(2, 3)

    def __post_init__(self):
        if self.n < 4 or self.n % 2 != 0:
            raise ValueError(f"lattice n must be even and >= 4, got {self.n}")
        frac = Fraction(self.dealias_fraction)
        if not (0 < frac <= 1):
            raise ValueError(f"dealias_fraction must lie in (0, 1], got {frac}")
        object.__setattr__(self, "dealias_fraction", frac)

    @property
    def cutoff(self) -> int:
        """Largest retained |index| per axis."""
        return int(self.dealias_fraction * (self.n // 2))

    @cached_property
    def k_index(self) -> np.ndarray:
        """Signed integer mode index per slot, fftn layout (int64, length n)."""
        return np.fft.fftfreq(self.n, d=1.0 / self.n).astype(np.int64)

    @cached_property
    def k2pi(self) -> np.ndarray:
        """Physical wavenumber 2*pi*index per slot (float64, length n)."""
        return 2.0 * np.pi * self.k_index.astype(np.float64)

    @cached_property
    def ksq(self) -> np.ndarray:
        """|2 pi k|^2 over the (n, n, n) index cube."""
        k2 = self.k2pi**2
        return k2[:, None, None] + k2[None, :, None] + k2[None, None, :]

    @cached_property
    def mask(self) -> np.ndarray:
        """Boolean retained-mode mask over the (n, n, n) index cube."""
        m = np.abs(self.k_index)
        keep = (m <= self.cutoff) & (m != self.n // 2)
        return keep[:, None, None] & keep[None, :, None] & keep[None, None, :]

    @cached_property
    def axis_coords(self) -> np.ndarray:
        """Physical grid coordinates along one axis: j/n for j = 0..n-1."""
        return np.arange(self.n, dtype=np.float64) / self.n

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        x = self.axis_coords
        return np.meshgrid(x, x, x, indexing="ij")


def _as_coeffs(arr: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=np.complex128)
    if out.shape != shape:
        raise ValueError(f"coefficient array must have shape {shape}, got {out.shape}")
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class SpectralField:
    """A real 3-component field, stored component-first as (3, n, n, n)
    complex coefficients.  Treated as immutable; the array is read-only.
    """

    lattice: Lattice
    coeffs: np.ndarray

    def __post_init__(self):
        n = self.lattice.n
        object.__setattr__(self, "coeffs", _as_coeffs(self.coeffs, (3, n, n, n)))

    def with_coeffs(self, coeffs: np.ndarray) -> "SpectralField":
        return SpectralField(self.lattice, coeffs)


@dataclass(frozen=True)
class ScalarSpectralField:
    """A real scalar field (pressure, multiplier), coefficients (n, n, n)."""

    lattice: Lattice
    coeffs: np.ndarray

    def __post_init__(self):
        n = self.lattice.n
        object.__setattr__(self, "coeffs", _as_coeffs(self.coeffs, (n, n, n)))


def _conj_reflection(coeffs: np.ndarray) -> np.ndarray:
    """conj(c[-i, -j, -l]) over the trailing three axes."""
    n = coeffs.shape[-1]
    rev = (-np.arange(n)) % n
    return np.conj(coeffs[..., rev[:, None, None], rev[None, :, None], rev[None, None, :]])


def hermitian_residual(field: SpectralField | ScalarSpectralField) -> float:
    """Max |c(k) - conj(c(-k))| over all retained slots (0 for a real field)."""
    c = field.coeffs
    return float(np.max(np.abs(c - _conj_reflection(c))))


def solenoidal_residual(field: SpectralField) -> float:
    """max_k |2 pi k . u(k)| relative to the largest mode magnitude.

    Scaling by the field's peak mode (not each mode's own magnitude)
    keeps roundoff-dust modes from dominating the ratio.
    """
    c = field.coeffs
    k = field.lattice.k2pi
    kdotu = (
        k[:, None, None] * c[0]
        + k[None, :, None] * c[1]
        + k[None, None, :] * c[2]
    )
    mag = np.sqrt(np.abs(c[0]) ** 2 + np.abs(c[1]) ** 2 + np.abs(c[2]) ** 2)
    scale = float(np.max(mag))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(kdotu))) / scale


def require_solenoidal(field: SpectralField, tol: float = 1e-10, what: str = "field") -> None:
    r = solenoidal_residual(field)
    if r > tol:
        raise ValueError(f"{what} is not divergence-free: mode residual {r:.3e} > {tol:.1e}")
