import numpy as np
import pytest
from fractions import Fraction

import vslb
from vslb.fields import (
    Lattice,
    SpectralField,
    hermitian_residual,
    solenoidal_residual,
    require_solenoidal,
)


def test_lattice_validation():
    with pytest.raises(ValueError):
        Lattice(2)
    with pytest.raises(ValueError):
        Lattice(15)
    with pytest.raises(ValueError):
        Lattice(16, Fraction(0))
    with pytest.raises(ValueError):
        Lattice(16, Fraction(3, 2))


@pytest.mark.parametrize("n,frac,cutoff", [(16, Fraction(2, 3), 5), (32, Fraction(2, 3), 10), (16, Fraction(1), 8)])
def test_cutoff(n, frac, cutoff):
    assert Lattice(n, frac).cutoff == cutoff


def test_mask_excludes_nyquist():
    lat = Lattice(8, Fraction(1))
    # even with fraction 1 the Nyquist slot (index -n/2) is dropped
    nyq = 4  # fftfreq slot for -4
    assert not lat.mask[nyq, 0, 0]
    assert lat.mask[3, 0, 0]
    assert lat.mask[-3, 0, 0]


def test_wavenumber_convention():
    lat = Lattice(8)
    assert lat.k_index[0] == 0
    assert lat.k_index[1] == 1
    assert lat.k_index[-1] == -1
    np.testing.assert_allclose(lat.k2pi, 2 * np.pi * lat.k_index)


def test_field_shape_checks(lat16):
    with pytest.raises(ValueError):
        SpectralField(lat16, np.zeros((3, 8, 8, 8), dtype=complex))
    f = SpectralField(lat16, np.zeros((3, 16, 16, 16), dtype=complex))
    assert f.coeffs.dtype == np.complex128


def test_fields_are_read_only(lat16):
    f = SpectralField(lat16, np.zeros((3, 16, 16, 16), dtype=complex))
    with pytest.raises(ValueError):
        f.coeffs[0, 0, 0, 0] = 1.0


def test_hermitian_residual_detects_corruption(lat16):
    ic = vslb.make_initial(vslb.ICSpec("beltrami_abc", 1.0), lat16)
    assert hermitian_residual(ic) < 1e-14
    bad = ic.coeffs.copy()
    bad[0, 1, 2, 3] += 0.5
    assert hermitian_residual(SpectralField(lat16, bad)) > 0.1


def test_solenoidal_residual_and_gate(lat16):
    ic = vslb.make_initial(vslb.ICSpec("taylor_green", 1.0), lat16)
    assert solenoidal_residual(ic) <= 1e-12
    require_solenoidal(ic)
    bad = ic.coeffs.copy()
    bad[0, 1, 0, 0] += 1.0  # pure-gradient-ish corruption
    with pytest.raises(ValueError):
        require_solenoidal(SpectralField(lat16, bad))
