"""Divergence-free initial condition constructors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .fields import Lattice, SpectralField, _conj_reflection
from .operators import l2_norm, to_spectral

KINDS = ("taylor_green", "beltrami_abc", "random_divfree")

__all__ = ["ICSpec", "make_initial", "KINDS"]


@dataclass(frozen=True)
class ICSpec:
    """Which initial field to build.

    ``seed``, ``spectrum_slope`` and ``peak_index`` only matter for the
    ``random_divfree`` kind: Gaussian mode amplitudes shaped as a ring
    around ``peak_index`` with a ``|k|^spectrum_slope`` power-law factor.
    """

    kind: str
    amplitude: float = 1.0
    seed: int = 0
    spectrum_slope: float = -2.0
    peak_index: int = 2

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"ic kind must be one of {KINDS}, got {self.kind!r}")
        if not self.amplitude > 0:
            raise ValueError(f"ic amplitude must be positive, got {self.amplitude}")
        if self.peak_index < 1:
            raise ValueError(f"peak_index must be >= 1, got {self.peak_index}")


def _taylor_green(lattice: Lattice, amplitude: float) -> SpectralField:
    x, y, z = lattice.meshgrid()
    tp = 2.0 * np.pi
    u = np.zeros((lattice.n,) * 3 + (3,))
    u[..., 0] = amplitude * np.sin(tp * x) * np.cos(tp * y) * np.cos(tp * z)
    u[..., 1] = -amplitude * np.cos(tp * x) * np.sin(tp * y) * np.cos(tp * z)
    return to_spectral(u, lattice)


def _beltrami_abc(lattice: Lattice, amplitude: float) -> SpectralField:
    # A = B = C = 1: eigenfield of curl with eigenvalue 2*pi
    x, y, z = lattice.meshgrid()
    tp = 2.0 * np.pi
    u = np.empty((lattice.n,) * 3 + (3,))
    u[..., 0] = amplitude * (np.sin(tp * z) + np.cos(tp * y))
    u[..., 1] = amplitude * (np.sin(tp * x) + np.cos(tp * z))
    u[..., 2] = amplitude * (np.sin(tp * y) + np.cos(tp * x))
    return to_spectral(u, lattice)


def _random_divfree(lattice: Lattice, spec: ICSpec) -> SpectralField:
    n = lattice.n
    if spec.peak_index > lattice.cutoff:
        raise ValueError(
            f"peak_index {spec.peak_index} outside the dealias mask "
            f"(cutoff {lattice.cutoff} at n={n})"
        )
    rng = np.random.default_rng(np.random.PCG64(spec.seed))
    c = rng.standard_normal((3, n, n, n)) + 1j * rng.standard_normal((3, n, n, n))

    m = np.abs(lattice.k_index).astype(np.float64)
    mag = np.sqrt(
        m[:, None, None] ** 2 + m[None, :, None] ** 2 + m[None, None, :] ** 2
    )
    p = float(spec.peak_index)
    ring = np.exp(-0.5 * ((mag - p) / (0.5 * p)) ** 2)
    tail = (np.where(mag > 0.0, mag, 1.0) / p) ** spec.spectrum_slope
    shape = ring * tail
    shape[0, 0, 0] = 0.0

    c *= shape * lattice.mask
    c = 0.5 * (c + _conj_reflection(c))  # exact Hermitian symmetry
    c = kernels.leray_hat(c, lattice.k2pi)
    c[:, 0, 0, 0] = 0.0

    field = SpectralField(lattice, c)
    norm = l2_norm(field)
    if norm == 0.0:
        raise ValueError("random initial field vanished; check spectrum parameters")
    return field.with_coeffs(field.coeffs * (spec.amplitude / norm))


def make_initial(spec: ICSpec, lattice: Lattice) -> SpectralField:
    """Build the requested solenoidal, mean-free, real initial field.

    ``random_divfree`` is normalised so its L2 norm equals ``amplitude``
    and is bit-reproducible for identical (seed, lattice, spec).
    """
    if spec.kind == "taylor_green":
        field = _taylor_green(lattice, spec.amplitude)
    elif spec.kind == "beltrami_abc":
        field = _beltrami_abc(lattice, spec.amplitude)
    else:
        return _random_divfree(lattice, spec)
    # analytic means vanish; drop the transform dust on the k=0 slot
    c = field.coeffs.copy()
    c[:, 0, 0, 0] = 0.0
    return field.with_coeffs(c)
