"""Bit-exact binary checkpoints for spectral fields.

Layout (little-endian throughout):

    bytes 0..3   magic "VSLB"
    u32          format version (currently 1)
    u32          n (grid points per axis)
    u32          component count (1 or 3)
    f64          sample time
    then one complex coefficient per (index triple, component), each as
    two f64 (real, imaginary), triples in ascending lexicographic order
    of the signed index (-n/2 ... n/2-1 per axis), components innermost.
"""

from __future__ import annotations

import struct
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import CheckpointFormatError
from .fields import Lattice, ScalarSpectralField, SpectralField

MAGIC = b"VSLB"
VERSION = 1

_HEADER = struct.Struct("<4sIII d")


def write_checkpoint(
    path: str | Path, field: SpectralField | ScalarSpectralField, time: float
) -> None:
    c = field.coeffs
    if isinstance(field, SpectralField):
        ncomp = 3
        data = np.moveaxis(c, 0, -1)
    else:
        ncomp = 1
        data = c[..., None]
    # fftshift puts triples into ascending signed-index order
    data = np.fft.fftshift(data, axes=(0, 1, 2))
    payload = np.ascontiguousarray(data, dtype="<c16").tobytes()
    header = _HEADER.pack(MAGIC, VERSION, field.lattice.n, ncomp, float(time))
    Path(path).write_bytes(header + payload)


def read_checkpoint(
    path: str | Path, dealias_fraction: Fraction = Fraction(2, 3)
) -> tuple[SpectralField | ScalarSpectralField, float]:
    """Read a checkpoint; the dealias fraction is not stored and must be
    supplied by the caller (coefficients were already masked on write)."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise CheckpointFormatError(f"{path}: truncated header")
    magic, version, n, ncomp, time = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise CheckpointFormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise CheckpointFormatError(f"{path}: unsupported version {version}")
    if ncomp not in (1, 3):
        raise CheckpointFormatError(f"{path}: component count must be 1 or 3, got {ncomp}")
    expected = _HEADER.size + 16 * ncomp * n**3
    if len(raw) != expected:
        raise CheckpointFormatError(
            f"{path}: expected {expected} bytes for n={n}, ncomp={ncomp}, got {len(raw)}"
        )
    flat = np.frombuffer(raw, dtype="<c16", offset=_HEADER.size)
    data = flat.reshape(n, n, n, ncomp)
    data = np.fft.ifftshift(data, axes=(0, 1, 2))
    lattice = Lattice(n, dealias_fraction)
    if ncomp == 3:
        field: SpectralField | ScalarSpectralField = SpectralField(
            lattice, np.moveaxis(data, -1, 0)
        )
    else:
        field = ScalarSpectralField(lattice, data[..., 0])
    return field, float(time)
