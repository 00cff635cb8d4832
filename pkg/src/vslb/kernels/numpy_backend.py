"""Pure-numpy implementations of the per-mode and per-gridpoint kernels.

Reference semantics for the numba backend; selected by setting the
environment variable ``VSLB_NUMBA=0`` (see ``vslb.kernels``).

Array conventions: spectral inputs ``c`` are (3, n, n, n) complex128 in
fftn layout, ``k`` is the length-n physical wavenumber vector 2*pi*index,
``ksq`` is the (n, n, n) cube |2 pi k|^2.
"""

from __future__ import annotations

import numpy as np


def _kxyz(k: np.ndarray):
    return k[:, None, None], k[None, :, None], k[None, None, :]


def curl_hat(c: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Per mode: out = i k x c."""
    kx, ky, kz = _kxyz(k)
    out = np.empty_like(c)
    out[0] = 1j * (ky * c[2] - kz * c[1])
    out[1] = 1j * (kz * c[0] - kx * c[2])
    out[2] = 1j * (kx * c[1] - ky * c[0])
    return out


def divergence_hat(c: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Per mode: i k . c."""
    kx, ky, kz = _kxyz(k)
    return 1j * (kx * c[0] + ky * c[1] + kz * c[2])


def leray_hat(c: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Per mode (k != 0): c - k (k.c) / |k|^2; the k=0 slot is untouched."""
    kx, ky, kz = _kxyz(k)
    ksq = kx**2 + ky**2 + kz**2
    inv = np.zeros_like(ksq)
    np.divide(1.0, ksq, out=inv, where=ksq > 0.0)
    kdotc = (kx * c[0] + ky * c[1] + kz * c[2]) * inv
    out = np.empty_like(c)
    out[0] = c[0] - kx * kdotc
    out[1] = c[1] - ky * kdotc
    out[2] = c[2] - kz * kdotc
    return out


def biot_savart_hat(c: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Per mode (k != 0): i k x c / |k|^2; the k=0 slot is set to zero."""
    kx, ky, kz = _kxyz(k)
    ksq = kx**2 + ky**2 + kz**2
    inv = np.zeros_like(ksq)
    np.divide(1.0, ksq, out=inv, where=ksq > 0.0)
    out = np.empty_like(c)
    out[0] = 1j * (ky * c[2] - kz * c[1]) * inv
    out[1] = 1j * (kz * c[0] - kx * c[2]) * inv
    out[2] = 1j * (kx * c[1] - ky * c[0]) * inv
    return out


def norm_sums(c: np.ndarray, ksq: np.ndarray) -> tuple[float, float]:
    """(sum |c|^2, sum |2 pi k|^2 |c|^2) over all components and modes."""
    mag = (c.real**2 + c.imag**2).sum(axis=0)
    return float(mag.sum()), float((ksq * mag).sum())


def heat_step(
    c: np.ndarray, src: np.ndarray, ksq: np.ndarray, nu: float, tau: float
) -> np.ndarray:
    """Advance the forced heat equation dc/dt = -nu |2 pi k|^2 c + src
    exactly by time tau, per mode."""
    x = nu * tau * ksq
    decay = np.exp(-x)
    # tau * (1 - e^-x)/x, series below 1e-8 to dodge 0/0 at k = 0
    phi = np.where(x > 1e-8, -np.expm1(-x) / np.where(x > 0.0, x, 1.0), 1.0 - 0.5 * x)
    return decay * c + (tau * phi) * src


def cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pointwise a x b on the grid, both (3, n, n, n)."""
    out = np.empty_like(a)
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]
    return out


def hermitian_extend(half: np.ndarray, n: int) -> np.ndarray:
    """Rebuild the full spectrum (..., n, n, n) from the rfftn half
    (..., n, n, n//2+1) by conjugate reflection; Hermitian by construction
    on the reconstructed slots."""
    out = np.empty(half.shape[:-1] + (n,), dtype=np.complex128)
    out[..., : n // 2 + 1] = half
    tail = np.conj(half[..., 1 : n // 2])[..., ::-1]
    out[..., 0, 0, n // 2 + 1 :] = tail[..., 0, 0, :]
    out[..., 0, 1:, n // 2 + 1 :] = tail[..., 0, :0:-1, :]
    out[..., 1:, 0, n // 2 + 1 :] = tail[..., :0:-1, 0, :]
    out[..., 1:, 1:, n // 2 + 1 :] = tail[..., :0:-1, :0:-1, :]
    return out


def scaled_axpy(e: np.ndarray, c: np.ndarray, a: float, f: np.ndarray, k: np.ndarray) -> np.ndarray:
    """e*c + a*(f*k), with e and f broadcast over the component axis."""
    return e * c + a * (f * k)


def rk4_final(c, k1, k2, k3, k4, e_half, e_full, dt):
    """e_full*c + dt/6*(e_full*k1 + 2*e_half*(k2+k3) + k4)."""
    return e_full * c + (dt / 6.0) * (e_full * k1 + 2.0 * e_half * (k2 + k3) + k4)


def fourth_moment(phys: np.ndarray) -> float:
    """Grid mean of (sum_i f_i^2)^2."""
    mag2 = (phys**2).sum(axis=0)
    return float(np.mean(mag2**2))
