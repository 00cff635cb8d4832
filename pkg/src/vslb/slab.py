"""Time-slab scheme: partition (0,T), solve the linear auxiliary
vorticity problem per slab by Picard iteration on the slab average,
chain slabs, and refine.

Trajectories are treated as piecewise linear in time between samples.
All slab-level time quadrature uses trapezoid on the sample nodes
(with linearly interpolated endpoint values), which keeps the averaging
inequalities exact up to roundoff: the trapezoid of the convex node
values over-estimates the exact integral of the interpolant, while
slab averages are integrated exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from . import kernels
from .errors import AdmissibilityError, ConfigError, PicardFailure
from .fields import SpectralField
from .operators import l2_norm
from .solver import Trajectory, _nonlinear_vorticity

__all__ = [
    "SlabPartition",
    "PicardReport",
    "SchemeConfig",
    "SlabRunResult",
    "slab_average",
    "slab_quadrature",
    "kk_star",
    "auxiliary_rhs",
    "solve_auxiliary",
    "picard_slab",
    "uniform_partition",
    "admissible_partition",
    "run_slab_scheme",
    "l2q_distance",
]


@dataclass(frozen=True)
class SchemeConfig:
    epsilon0: float = 0.5
    sobolev_C: float = 0.25
    picard_tol: float = 1e-10
    picard_max_iter: int = 60
    initial_slab_count: int = 4
    max_refinements: int = 10

    def __post_init__(self):
        if not 0.0 < self.epsilon0 < 1.0:
            raise ConfigError(f"epsilon0 must lie in (0,1), got {self.epsilon0}")
        if not self.sobolev_C > 0:
            raise ConfigError(f"sobolev_C must be positive, got {self.sobolev_C}")
        if not self.picard_tol > 0:
            raise ConfigError(f"picard_tol must be positive, got {self.picard_tol}")
        if self.picard_max_iter < 1:
            raise ConfigError("picard_max_iter must be >= 1")
        if self.initial_slab_count < 1:
            raise ConfigError("initial_slab_count must be >= 1")
        if self.max_refinements < 0:
            raise ConfigError("max_refinements must be >= 0")


@dataclass(frozen=True)
class SlabPartition:
    """Strictly increasing slab boundaries with per-slab admissibility data."""

    times: np.ndarray
    kk_star: np.ndarray
    admissible: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.float64)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "kk_star", np.asarray(self.kk_star, dtype=np.float64))
        object.__setattr__(self, "admissible", np.asarray(self.admissible, dtype=bool))
        if np.any(np.diff(t) <= 0):
            raise ValueError("partition times must be strictly increasing")
        if len(self.kk_star) != len(t) - 1 or len(self.admissible) != len(t) - 1:
            raise ValueError("per-slab arrays must have len(times) - 1 entries")

    @property
    def slab_count(self) -> int:
        return len(self.times) - 1

    def slabs(self):
        for k in range(self.slab_count):
            yield float(self.times[k]), float(self.times[k + 1])


@dataclass(frozen=True)
class PicardReport:
    """Residual history of one slab fixed-point solve.

    residuals[j] = L2 distance between successive slab-averaged iterates;
    contraction_ratio is the worst successive residual ratio (0 when
    fewer than two residuals were produced).
    """

    iterations: int
    residuals: list[float] = field(default_factory=list)
    contraction_ratio: float = 0.0
    converged: bool = False


@dataclass(frozen=True)
class SlabRunResult:
    trajectory: Trajectory
    m_sup: np.ndarray
    partition: SlabPartition
    reports: list[PicardReport]
    k0: float


def _node_times(traj: Trajectory, t_a: float, t_b: float) -> np.ndarray:
    lo, hi = traj.span
    if t_a < lo - 1e-12 or t_b > hi + 1e-12 or t_b <= t_a:
        raise ValueError(
            f"slab [{t_a}, {t_b}] not contained in trajectory span [{lo}, {hi}]"
        )
    inside = traj.times[(traj.times > t_a + 1e-14) & (traj.times < t_b - 1e-14)]
    return np.concatenate(([t_a], inside, [t_b]))


def _node_coeffs(traj: Trajectory, nodes: np.ndarray) -> list[np.ndarray]:
    return [traj.interp_coeffs(float(t)) for t in nodes]


def slab_average(traj: Trajectory, t_a: float, t_b: float) -> SpectralField:
    """Time average of the field over [t_a, t_b], exact for the
    piecewise-linear interpolant of the samples.

    Needs at least 2 samples inside the closed slab.
    """
    inside = np.count_nonzero((traj.times >= t_a - 1e-14) & (traj.times <= t_b + 1e-14))
    if inside < 2:
        raise ValueError(
            f"slab [{t_a}, {t_b}] contains {inside} samples; need at least 2"
        )
    nodes = _node_times(traj, t_a, t_b)
    coeffs = _node_coeffs(traj, nodes)
    w = np.empty(len(nodes))
    w[0] = 0.5 * (nodes[1] - nodes[0])
    w[-1] = 0.5 * (nodes[-1] - nodes[-2])
    w[1:-1] = 0.5 * (nodes[2:] - nodes[:-2])
    acc = np.zeros_like(coeffs[0])
    for wi, ci in zip(w, coeffs):
        acc += wi * ci
    return SpectralField(traj.lattice, acc / (t_b - t_a))


def slab_quadrature(traj, t_a, t_b, value_fn) -> tuple[float, float]:
    """(trapezoid integral, sup) of value_fn(coeffs) over slab nodes."""
    nodes = _node_times(traj, t_a, t_b)
    vals = np.array([value_fn(c) for c in _node_coeffs(traj, nodes)])
    integral = float(trapezoid(vals, nodes))
    return integral, float(np.max(vals))


def kk_star(traj: Trajectory, t_a: float, t_b: float) -> float:
    """Slab admissibility functional
    (t_b - t_a) * sup_slab sum_i ||u_i||^2  +  int_slab sum_i ||grad u_i||^2."""
    nodes = _node_times(traj, t_a, t_b)
    ksq = traj.lattice.ksq
    s0 = np.empty(len(nodes))
    s1 = np.empty(len(nodes))
    for i, c in enumerate(_node_coeffs(traj, nodes)):
        s0[i], s1[i] = kernels.norm_sums(c, ksq)
    return float((t_b - t_a) * np.max(s0) + trapezoid(s1, nodes))


def auxiliary_rhs(u_bar: SpectralField, omega_bar: SpectralField) -> SpectralField:
    """Frozen slab source leray_project(-(ubar.grad)wbar + (wbar.grad)ubar).

    The projection realises the multiplier that keeps the evolved field
    divergence-free; the k=0 mode is pinned to zero.
    """
    if u_bar.lattice != omega_bar.lattice:
        raise ValueError("u_bar and omega_bar must share a lattice")
    c = _nonlinear_vorticity(omega_bar.coeffs, u_bar.coeffs, u_bar.lattice)
    return SpectralField(u_bar.lattice, c)


def solve_auxiliary(
    omega_init: SpectralField,
    source: SpectralField,
    t_a: float,
    t_b: float,
    dt: float,
    viscosity: float = 1.0,
) -> Trajectory:
    """Exact per-mode solution of dw/dt = -nu |2 pi k|^2 w + source,
    sampled uniformly with spacing ~dt over [t_a, t_b]; k=0 stays zero.
    """
    if t_b <= t_a:
        raise ValueError("slab must have positive length")
    if not dt > 0:
        raise ValueError("dt must be positive")
    lat = omega_init.lattice
    m = max(1, int(round((t_b - t_a) / dt)))
    h = (t_b - t_a) / m
    times = t_a + h * np.arange(m + 1)
    times[-1] = t_b

    c = omega_init.coeffs.copy()
    c[:, 0, 0, 0] = 0.0
    src = source.coeffs
    fields = [SpectralField(lat, c.copy())]
    for _ in range(m):
        c = kernels.heat_step(c, src, lat.ksq, viscosity, h)
        c[:, 0, 0, 0] = 0.0
        fields.append(SpectralField(lat, c.copy()))
    return Trajectory(times, fields)


def _median_spacing(times: np.ndarray) -> float:
    return float(np.median(np.diff(times)))


def picard_slab(
    u_traj: Trajectory,
    omega_init: SpectralField,
    t_a: float,
    t_b: float,
    cfg: SchemeConfig,
    viscosity: float = 1.0,
) -> tuple[Trajectory, PicardReport]:
    """Fixed-point solve of the slab auxiliary problem.

    Iterates: freeze the source from the current averaged iterate, solve
    the heat problem exactly, re-average; stops when successive averages
    are within picard_tol in L2.  On non-convergence the report comes
    back with converged=False (no exception) so the caller can record it.
    """
    u_bar = slab_average(u_traj, t_a, t_b)
    dt_aux = _median_spacing(u_traj.times)

    omega_bar = omega_init
    trajectory = None
    residuals: list[float] = []
    converged = False
    iterations = 0
    for _ in range(cfg.picard_max_iter):
        iterations += 1
        source = auxiliary_rhs(u_bar, omega_bar)
        trajectory = solve_auxiliary(omega_init, source, t_a, t_b, dt_aux, viscosity)
        new_bar = slab_average(trajectory, t_a, t_b)
        residual = l2_norm(
            SpectralField(u_bar.lattice, new_bar.coeffs - omega_bar.coeffs)
        )
        residuals.append(float(residual))
        omega_bar = new_bar
        if residual <= cfg.picard_tol:
            converged = True
            break

    ratios = [
        residuals[i] / residuals[i - 1]
        for i in range(1, len(residuals))
        if residuals[i - 1] > 0.0
    ]
    report = PicardReport(
        iterations=iterations,
        residuals=residuals,
        contraction_ratio=max(ratios) if ratios else 0.0,
        converged=converged,
    )
    return trajectory, report


def _flags(kk: np.ndarray, cfg: SchemeConfig) -> np.ndarray:
    return 1.0 - 4.0 * cfg.sobolev_C * kk >= cfg.epsilon0


def uniform_partition(
    u_traj: Trajectory, slab_count: int, cfg: SchemeConfig
) -> SlabPartition:
    """Uniform partition of the trajectory span with admissibility flags
    evaluated but not enforced (used by refinement studies)."""
    lo, hi = u_traj.span
    times = np.linspace(lo, hi, slab_count + 1)
    kk = np.array([kk_star(u_traj, times[k], times[k + 1]) for k in range(slab_count)])
    return SlabPartition(times, kk, _flags(kk, cfg))


def admissible_partition(u_traj: Trajectory, cfg: SchemeConfig) -> SlabPartition:
    """Bisect slabs until 1 - 4 C K_k >= epsilon0 everywhere.

    Starts from ``initial_slab_count`` uniform slabs and runs at most
    ``max_refinements`` bisection rounds; raises AdmissibilityError with
    the evaluated partition when stubborn slabs remain (a discrete
    trajectory may concentrate dissipation faster than bisection can
    dilute it within the budget).
    """
    lo, hi = u_traj.span
    times = list(np.linspace(lo, hi, cfg.initial_slab_count + 1))
    for round_idx in range(cfg.max_refinements + 1):
        kk = np.array(
            [kk_star(u_traj, times[k], times[k + 1]) for k in range(len(times) - 1)]
        )
        flags = _flags(kk, cfg)
        partition = SlabPartition(np.array(times), kk, flags)
        bad = np.nonzero(~flags)[0]
        if len(bad) == 0:
            return partition
        if round_idx == cfg.max_refinements:
            raise AdmissibilityError(partition, bad)
        refined: list[float] = [times[0]]
        for k in range(len(times) - 1):
            if not flags[k]:
                refined.append(0.5 * (times[k] + times[k + 1]))
            refined.append(times[k + 1])
        times = refined
    raise AssertionError("unreachable")


def run_slab_scheme(
    u_traj: Trajectory,
    omega0: SpectralField,
    cfg: SchemeConfig,
    partition: SlabPartition | None = None,
    viscosity: float = 1.0,
) -> SlabRunResult:
    """Chain Picard slab solves over an admissible partition.

    omega0 must be (numerically) the curl of the trajectory's initial
    field; each slab starts from the previous terminal state.  Raises
    PicardFailure (carrying partial results) if any slab stalls.
    """
    w0 = kernels.curl_hat(u_traj.fields[0].coeffs, u_traj.lattice.k2pi)
    scale = max(1.0, float(np.sqrt(kernels.norm_sums(w0, u_traj.lattice.ksq)[0])))
    mismatch = float(
        np.sqrt(kernels.norm_sums(omega0.coeffs - w0, u_traj.lattice.ksq)[0])
    )
    if mismatch > 1e-8 * scale:
        raise ValueError(
            f"omega0 is not the curl of the initial velocity (L2 mismatch {mismatch:.3e})"
        )

    if partition is None:
        partition = admissible_partition(u_traj, cfg)

    k0 = kernels.norm_sums(omega0.coeffs, u_traj.lattice.ksq)[0]
    state = omega0
    reports: list[PicardReport] = []
    m_sup: list[float] = []
    times: list[float] = []
    fields: list[SpectralField] = []
    for k, (t_a, t_b) in enumerate(partition.slabs()):
        slab_traj, report = picard_slab(u_traj, state, t_a, t_b, cfg, viscosity)
        reports.append(report)
        if not report.converged:
            partial = SlabRunResult(
                Trajectory(np.array(times), fields) if fields else None,
                np.array(m_sup),
                partition,
                reports,
                float(k0),
            )
            raise PicardFailure(k, report, partial)
        sup_e = max(
            kernels.norm_sums(f.coeffs, u_traj.lattice.ksq)[0] for f in slab_traj.fields
        )
        m_sup.append(float(sup_e))
        start = 1 if fields else 0  # slab shares its first node with the chain
        times.extend(slab_traj.times[start:])
        fields.extend(slab_traj.fields[start:])
        state = slab_traj.fields[-1]

    return SlabRunResult(
        Trajectory(np.array(times), fields),
        np.array(m_sup),
        partition,
        reports,
        float(k0),
    )


def l2q_distance(traj: Trajectory, reference_fn) -> float:
    """L2(Q) = L2 in space-time distance between a trajectory and a
    reference field function of time, trapezoid over the trajectory's
    own sample times.  ``reference_fn(t) -> coeffs``."""
    ksq = traj.lattice.ksq
    vals = np.array(
        [
            kernels.norm_sums(f.coeffs - reference_fn(float(t)), ksq)[0]
            for t, f in zip(traj.times, traj.fields)
        ]
    )
    return float(math.sqrt(max(0.0, trapezoid(vals, traj.times))))
