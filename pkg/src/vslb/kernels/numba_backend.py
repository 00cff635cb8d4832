"""Numba-compiled kernels, semantics identical to ``numpy_backend``.

Loops are kept serial so results do not depend on thread count; the win
over numpy comes from fusing the per-mode arithmetic into one pass
without temporaries.  First use pays a JIT compile that is cached on
disk (``cache=True``).
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def curl_hat(c, k):
    n = k.shape[0]
    out = np.empty_like(c)
    for i in range(n):
        ki = k[i]
        for j in range(n):
            kj = k[j]
            for l in range(n):
                kl = k[l]
                a0 = c[0, i, j, l]
                a1 = c[1, i, j, l]
                a2 = c[2, i, j, l]
                out[0, i, j, l] = 1j * (kj * a2 - kl * a1)
                out[1, i, j, l] = 1j * (kl * a0 - ki * a2)
                out[2, i, j, l] = 1j * (ki * a1 - kj * a0)
    return out


@njit(cache=True)
def divergence_hat(c, k):
    n = k.shape[0]
    out = np.empty(c.shape[1:], dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            for l in range(n):
                out[i, j, l] = 1j * (
                    k[i] * c[0, i, j, l] + k[j] * c[1, i, j, l] + k[l] * c[2, i, j, l]
                )
    return out


@njit(cache=True)
def leray_hat(c, k):
    n = k.shape[0]
    out = np.empty_like(c)
    for i in range(n):
        ki = k[i]
        for j in range(n):
            kj = k[j]
            for l in range(n):
                kl = k[l]
                ksq = ki * ki + kj * kj + kl * kl
                a0 = c[0, i, j, l]
                a1 = c[1, i, j, l]
                a2 = c[2, i, j, l]
                if ksq > 0.0:
                    kd = (ki * a0 + kj * a1 + kl * a2) / ksq
                    out[0, i, j, l] = a0 - ki * kd
                    out[1, i, j, l] = a1 - kj * kd
                    out[2, i, j, l] = a2 - kl * kd
                else:
                    out[0, i, j, l] = a0
                    out[1, i, j, l] = a1
                    out[2, i, j, l] = a2
    return out


@njit(cache=True)
def biot_savart_hat(c, k):
    n = k.shape[0]
    out = np.empty_like(c)
    for i in range(n):
        ki = k[i]
        for j in range(n):
            kj = k[j]
            for l in range(n):
                kl = k[l]
                ksq = ki * ki + kj * kj + kl * kl
                if ksq > 0.0:
                    a0 = c[0, i, j, l]
                    a1 = c[1, i, j, l]
                    a2 = c[2, i, j, l]
                    out[0, i, j, l] = 1j * (kj * a2 - kl * a1) / ksq
                    out[1, i, j, l] = 1j * (kl * a0 - ki * a2) / ksq
                    out[2, i, j, l] = 1j * (ki * a1 - kj * a0) / ksq
                else:
                    out[0, i, j, l] = 0.0
                    out[1, i, j, l] = 0.0
                    out[2, i, j, l] = 0.0
    return out


@njit(cache=True)
def norm_sums(c, ksq):
    s0 = 0.0
    s1 = 0.0
    n = c.shape[1]
    for i in range(n):
        for j in range(n):
            for l in range(n):
                m = (
                    c[0, i, j, l].real ** 2
                    + c[0, i, j, l].imag ** 2
                    + c[1, i, j, l].real ** 2
                    + c[1, i, j, l].imag ** 2
                    + c[2, i, j, l].real ** 2
                    + c[2, i, j, l].imag ** 2
                )
                s0 += m
                s1 += ksq[i, j, l] * m
    return s0, s1


@njit(cache=True)
def heat_step(c, src, ksq, nu, tau):
    out = np.empty_like(c)
    n = c.shape[1]
    for i in range(n):
        for j in range(n):
            for l in range(n):
                x = nu * tau * ksq[i, j, l]
                decay = np.exp(-x)
                if x > 1e-8:
                    g = tau * (-np.expm1(-x)) / x
                else:
                    g = tau * (1.0 - 0.5 * x)
                for comp in range(3):
                    out[comp, i, j, l] = decay * c[comp, i, j, l] + g * src[comp, i, j, l]
    return out


@njit(cache=True)
def cross(a, b):
    out = np.empty_like(a)
    n = a.shape[1]
    for i in range(n):
        for j in range(n):
            for l in range(n):
                a0 = a[0, i, j, l]
                a1 = a[1, i, j, l]
                a2 = a[2, i, j, l]
                b0 = b[0, i, j, l]
                b1 = b[1, i, j, l]
                b2 = b[2, i, j, l]
                out[0, i, j, l] = a1 * b2 - a2 * b1
                out[1, i, j, l] = a2 * b0 - a0 * b2
                out[2, i, j, l] = a0 * b1 - a1 * b0
    return out


@njit(cache=True)
def hermitian_extend(half, n):
    h = n // 2 + 1
    out = np.empty((3, n, n, n), dtype=np.complex128)
    for comp in range(3):
        for i in range(n):
            im = (n - i) % n
            for j in range(n):
                jm = (n - j) % n
                for l in range(h):
                    out[comp, i, j, l] = half[comp, i, j, l]
                for l in range(h, n):
                    out[comp, i, j, l] = np.conj(half[comp, im, jm, n - l])
    return out


@njit(cache=True)
def scaled_axpy(e, c, a, f, k):
    out = np.empty_like(c)
    n = c.shape[1]
    for i in range(n):
        for j in range(n):
            for l in range(n):
                ee = e[i, j, l]
                ff = f[i, j, l]
                for comp in range(3):
                    out[comp, i, j, l] = ee * c[comp, i, j, l] + a * (
                        ff * k[comp, i, j, l]
                    )
    return out


@njit(cache=True)
def rk4_final(c, k1, k2, k3, k4, e_half, e_full, dt):
    out = np.empty_like(c)
    n = c.shape[1]
    s = dt / 6.0
    for i in range(n):
        for j in range(n):
            for l in range(n):
                eh = e_half[i, j, l]
                ef = e_full[i, j, l]
                for comp in range(3):
                    out[comp, i, j, l] = ef * c[comp, i, j, l] + s * (
                        ef * k1[comp, i, j, l]
                        + 2.0 * eh * (k2[comp, i, j, l] + k3[comp, i, j, l])
                        + k4[comp, i, j, l]
                    )
    return out


@njit(cache=True)
def fourth_moment(phys):
    n = phys.shape[1]
    acc = 0.0
    for i in range(n):
        for j in range(n):
            for l in range(n):
                m2 = (
                    phys[0, i, j, l] ** 2
                    + phys[1, i, j, l] ** 2
                    + phys[2, i, j, l] ** 2
                )
                acc += m2 * m2
    return acc / (n * n * n)
