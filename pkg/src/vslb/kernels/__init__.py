"""Hot-kernel dispatch.

``VSLB_NUMBA=0`` (or ``false``/``off``/``no``) forces the pure-numpy
kernels; anything else uses the numba-compiled ones when numba imports.
``VSLB_THREADS`` caps FFT worker threads (the mode kernels themselves are
serial so that results never depend on thread count).
"""

from __future__ import annotations

import os

_flag = os.environ.get("VSLB_NUMBA", "1").strip().lower()
_want_numba = _flag not in {"0", "false", "off", "no"}

if _want_numba:
    try:
        from . import numba_backend as _impl

        BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba is a hard dep, but be safe
        from . import numpy_backend as _impl

        BACKEND = "numpy"
else:
    from . import numpy_backend as _impl

    BACKEND = "numpy"

curl_hat = _impl.curl_hat
divergence_hat = _impl.divergence_hat
leray_hat = _impl.leray_hat
biot_savart_hat = _impl.biot_savart_hat
norm_sums = _impl.norm_sums
heat_step = _impl.heat_step
cross = _impl.cross
fourth_moment = _impl.fourth_moment
hermitian_extend = _impl.hermitian_extend
scaled_axpy = _impl.scaled_axpy
rk4_final = _impl.rk4_final


def _resolve_workers() -> int:
    cap = os.environ.get("VSLB_THREADS")
    if cap is not None:
        try:
            return max(1, int(cap))
        except ValueError:
            return 1
    return max(1, min(2, os.cpu_count() or 1))


_WORKERS = _resolve_workers()


def fft_workers() -> int:
    """Worker count for scipy.fft, capped by VSLB_THREADS (read at import)."""
    return _WORKERS


__all__ = [
    "BACKEND",
    "fft_workers",
    "curl_hat",
    "divergence_hat",
    "leray_hat",
    "biot_savart_hat",
    "norm_sums",
    "heat_step",
    "cross",
    "fourth_moment",
    "hermitian_extend",
    "scaled_axpy",
    "rk4_final",
]
