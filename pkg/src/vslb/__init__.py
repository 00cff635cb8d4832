"""vslb: pseudo-spectral 3D incompressible Navier-Stokes on the periodic
unit box, a time-slab averaged auxiliary-problem scheme for the vorticity
equation, and an auditor that measures the a-priori estimates the
construction relies on."""

from .fields import Lattice, ScalarSpectralField, SpectralField
from .initial import ICSpec, make_initial
from .operators import (
    biot_savart,
    curl,
    dealias,
    divergence,
    gradient,
    leray_project,
    norms,
    to_physical,
    to_spectral,
)
from .slab import (
    PicardReport,
    SchemeConfig,
    SlabPartition,
    SlabRunResult,
    admissible_partition,
    auxiliary_rhs,
    picard_slab,
    run_slab_scheme,
    slab_average,
    solve_auxiliary,
)
from .solver import (
    DiagnosticsRecord,
    SolverConfig,
    Trajectory,
    integrate,
    step,
    velocity_rhs,
    vorticity_rhs,
)

__version__ = "0.1.0"

__all__ = [
    "Lattice",
    "SpectralField",
    "ScalarSpectralField",
    "ICSpec",
    "make_initial",
    "to_spectral",
    "to_physical",
    "curl",
    "divergence",
    "gradient",
    "leray_project",
    "biot_savart",
    "dealias",
    "norms",
    "SolverConfig",
    "Trajectory",
    "DiagnosticsRecord",
    "velocity_rhs",
    "vorticity_rhs",
    "step",
    "integrate",
    "SlabPartition",
    "PicardReport",
    "SchemeConfig",
    "SlabRunResult",
    "slab_average",
    "auxiliary_rhs",
    "solve_auxiliary",
    "picard_slab",
    "admissible_partition",
    "run_slab_scheme",
    "__version__",
]
