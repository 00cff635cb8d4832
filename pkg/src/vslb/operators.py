"""Transforms, differential operators and norms on spectral fields.

Forward transforms go through ``rfftn`` plus an explicit conjugate
reflection so the stored full spectrum is Hermitian-symmetric by
construction, not merely to roundoff.  The k=0 slot of velocity and
vorticity fields is pinned to zero everywhere a field is produced
(zero-mean periodic gauge); the inverse Laplacian is defined as zero on
k=0 accordingly.
"""

from __future__ import annotations

import numpy as np
import scipy.fft as sfft

from . import kernels
from .fields import Lattice, ScalarSpectralField, SpectralField

__all__ = [
    "to_spectral",
    "to_physical",
    "curl",
    "divergence",
    "gradient",
    "leray_project",
    "biot_savart",
    "dealias",
    "norms",
    "l2_norm",
    "h1_seminorm",
]

_SPATIAL = (-3, -2, -1)


def _phys_to_hat(phys: np.ndarray, lattice: Lattice) -> np.ndarray:
    """Real grid data (3, n, n, n) -> full masked spectrum."""
    half = sfft.rfftn(
        phys, axes=_SPATIAL, workers=kernels.fft_workers(), norm="forward"
    )
    full = kernels.hermitian_extend(half, lattice.n)
    full *= lattice.mask
    return full


def _hat_to_phys(coeffs: np.ndarray, lattice: Lattice) -> np.ndarray:
    """Full spectrum -> real grid data, no symmetry check (internal)."""
    return sfft.ifftn(
        coeffs, axes=_SPATIAL, workers=kernels.fft_workers(), norm="forward"
    ).real


def to_spectral(samples: np.ndarray, lattice: Lattice) -> SpectralField:
    """Forward transform of grid samples shaped (n, n, n, 3).

    The k=0 coefficient equals the grid mean; the retained-mode mask
    (including the Nyquist slot) is applied, so content outside the mask
    is lost by design.
    """
    samples = np.asarray(samples, dtype=np.float64)
    n = lattice.n
    if samples.shape != (n, n, n, 3):
        raise ValueError(
            f"samples must have shape ({n}, {n}, {n}, 3), got {samples.shape}"
        )
    phys = np.ascontiguousarray(np.moveaxis(samples, -1, 0))
    return SpectralField(lattice, _phys_to_hat(phys, lattice))


def to_physical(field: SpectralField | ScalarSpectralField) -> np.ndarray:
    """Inverse transform to the grid; (n, n, n, 3) for vector fields.

    Raises if the coefficients are not Hermitian-symmetric: the imaginary
    residue of the inverse transform must stay below 1e-12 relative to
    the field scale.
    """
    out = sfft.ifftn(
        field.coeffs, axes=_SPATIAL, workers=kernels.fft_workers(), norm="forward"
    )
    scale = max(1.0, float(np.max(np.abs(out.real))) if out.size else 1.0)
    imag_max = float(np.max(np.abs(out.imag)))
    if imag_max > 1e-12 * scale:
        raise ValueError(
            f"Hermitian symmetry violated: imaginary residue {imag_max:.3e} "
            f"exceeds 1e-12 * {scale:.3e}"
        )
    if isinstance(field, SpectralField):
        return np.moveaxis(out.real, 0, -1).copy()
    return out.real.copy()


def curl(field: SpectralField) -> SpectralField:
    """Per mode i (2 pi k) x u(k); maps solenoidal fields to solenoidal."""
    return field.with_coeffs(kernels.curl_hat(field.coeffs, field.lattice.k2pi))


def divergence(field: SpectralField) -> ScalarSpectralField:
    """Per mode i (2 pi k) . u(k)."""
    return ScalarSpectralField(
        field.lattice, kernels.divergence_hat(field.coeffs, field.lattice.k2pi)
    )


def gradient(field: ScalarSpectralField) -> SpectralField:
    """Per mode i (2 pi k) f(k), one component per direction."""
    k = field.lattice.k2pi
    c = field.coeffs
    out = np.empty((3,) + c.shape, dtype=np.complex128)
    out[0] = (1j * k[:, None, None]) * c
    out[1] = (1j * k[None, :, None]) * c
    out[2] = (1j * k[None, None, :]) * c
    return SpectralField(field.lattice, out)


def leray_project(field: SpectralField) -> SpectralField:
    """Orthogonal projection onto divergence-free fields (k=0 untouched).

    Idempotent and self-adjoint; realises the pressure/multiplier
    elimination, since any mean-free gradient lies in its kernel.
    """
    return field.with_coeffs(kernels.leray_hat(field.coeffs, field.lattice.k2pi))


def biot_savart(vorticity: SpectralField) -> SpectralField:
    """Velocity from vorticity: u(k) = i (2 pi k) x w(k) / |2 pi k|^2.

    Requires mean-free input (the inverse Laplacian is undefined on
    constants); output is solenoidal with zero mean and satisfies
    curl(biot_savart(w)) = w for mean-free solenoidal w.
    """
    c = vorticity.coeffs
    mean_mag = float(np.sqrt(np.sum(np.abs(c[:, 0, 0, 0]) ** 2)))
    scale = max(1.0, float(np.sqrt(kernels.norm_sums(c, vorticity.lattice.ksq)[0])))
    if mean_mag > 1e-12 * scale:
        raise ValueError(
            f"vorticity must be mean-free: |k=0 coefficient| = {mean_mag:.3e}"
        )
    return vorticity.with_coeffs(
        kernels.biot_savart_hat(c, vorticity.lattice.k2pi)
    )


def dealias(field: SpectralField) -> SpectralField:
    """Zero every mode outside the retained-mode mask; idempotent."""
    return field.with_coeffs(field.coeffs * field.lattice.mask)


def l2_norm(field: SpectralField) -> float:
    """sqrt(sum_i ||f_i||^2_{L2}) via Parseval."""
    return float(np.sqrt(kernels.norm_sums(field.coeffs, field.lattice.ksq)[0]))


def h1_seminorm(field: SpectralField) -> float:
    """sqrt(sum_i ||grad f_i||^2_{L2}) via Parseval."""
    return float(np.sqrt(kernels.norm_sums(field.coeffs, field.lattice.ksq)[1]))


def norms(field: SpectralField) -> tuple[float, float, float]:
    """(L2 norm, H1 seminorm, L4 norm).

    L2 and H1 are exact mode sums; L4 is uniform-grid quadrature of
    |u|^4 = (sum_i u_i^2)^2, spectrally accurate for band-limited fields.
    """
    s0, s1 = kernels.norm_sums(field.coeffs, field.lattice.ksq)
    phys = _hat_to_phys(field.coeffs, field.lattice)
    l4 = kernels.fourth_moment(np.ascontiguousarray(phys)) ** 0.25
    return float(np.sqrt(s0)), float(np.sqrt(s1)), float(l4)
