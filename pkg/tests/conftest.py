import numpy as np
import pytest

import vslb
from vslb.solver import SolverConfig, integrate


def rel_l2(a: np.ndarray, b: np.ndarray) -> float:
    """Relative L2 distance between coefficient arrays."""
    scale = np.sqrt(np.sum(np.abs(b) ** 2))
    if scale == 0.0:
        return float(np.sqrt(np.sum(np.abs(a - b) ** 2)))
    return float(np.sqrt(np.sum(np.abs(a - b) ** 2)) / scale)


@pytest.fixture(scope="session")
def lat8():
    return vslb.Lattice(8)


@pytest.fixture(scope="session")
def lat16():
    return vslb.Lattice(16)


@pytest.fixture(scope="session")
def lat32():
    return vslb.Lattice(32)


@pytest.fixture(scope="session")
def bel16_traj(lat16):
    """Beltrami reference run used by slab and audit tests: n=16, T=0.1."""
    ic = vslb.make_initial(vslb.ICSpec("beltrami_abc", 1.0), lat16)
    cfg = SolverConfig(lat16, dt=2e-4, t_end=0.1, sample_stride=2)
    traj, records = integrate(cfg, ic)
    return traj, records


@pytest.fixture(scope="session")
def tg16_fine_traj(lat16):
    """Short, finely sampled Taylor-Green run for Picard rate checks."""
    ic = vslb.make_initial(vslb.ICSpec("taylor_green", 1.0), lat16)
    cfg = SolverConfig(lat16, dt=5e-5, t_end=4e-3, sample_stride=1)
    traj, records = integrate(cfg, ic)
    return traj, records
