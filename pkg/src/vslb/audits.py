"""Numerical verification of the identities and a-priori inequalities
the slab construction rests on.

Report conventions: every audit produces an AuditReport with
``pass iff margin >= -tolerance``.  Inequality audits state the claim as
``lhs <= rhs`` and report the raw slack ``margin = rhs - lhs`` (never
clamped; a negative margin is a recorded outcome, not an error).
Identity audits report ``margin = -(relative residual)`` so the same
pass rule applies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft
from scipy.integrate import simpson, trapezoid

from . import kernels
from .fields import Lattice, SpectralField, _conj_reflection, require_solenoidal
from .operators import _hat_to_phys, l2_norm
from .slab import SchemeConfig, SlabRunResult, slab_average, slab_quadrature
from .solver import Trajectory

__all__ = [
    "AuditReport",
    "seeded_field",
    "audit_energy_identity",
    "audit_grad_curl",
    "audit_identity_suite",
    "probe_sobolev_constant",
    "scheme_constant_from_probe",
    "spacetime_ratio",
    "audit_enstrophy_chain",
    "audit_time_derivative_bound",
    "time_derivative_fields",
    "audit_average_convergence",
]


@dataclass(frozen=True)
class AuditReport:
    name: str
    kind: str  # "identity" | "inequality" | "info"
    lhs: float
    rhs: float
    margin: float
    passed: bool
    tolerance: float
    context: dict = field(default_factory=dict)

    def context_str(self) -> str:
        parts = [f"kind={self.kind}", f"tol={self.tolerance:.3g}"]
        parts += [f"{k}={v}" for k, v in self.context.items()]
        return ";".join(parts)


def _identity_report(name, lhs, rhs, tolerance, context) -> AuditReport:
    residual = abs(lhs - rhs) / max(abs(rhs), abs(lhs), 1e-300)
    return AuditReport(
        name, "identity", float(lhs), float(rhs), -residual,
        residual <= tolerance, tolerance, context,
    )


def _inequality_report(name, lhs, rhs, tolerance, context) -> AuditReport:
    margin = rhs - lhs
    return AuditReport(
        name, "inequality", float(lhs), float(rhs), float(margin),
        margin >= -tolerance, tolerance, context,
    )


def seeded_field(
    lattice: Lattice, rng: np.random.Generator, solenoidal: bool = False
) -> SpectralField:
    """Random band-limited Hermitian field with unit-scale coefficients."""
    n = lattice.n
    c = rng.standard_normal((3, n, n, n)) + 1j * rng.standard_normal((3, n, n, n))
    c *= lattice.mask
    c = 0.5 * (c + _conj_reflection(c))
    if solenoidal:
        c = kernels.leray_hat(c, lattice.k2pi)
        c[:, 0, 0, 0] = 0.0
    return SpectralField(lattice, c)


def audit_energy_identity(traj: Trajectory, tolerance: float = 1e-5) -> AuditReport:
    """Global balance int |u(T)|^2 + 2 int_0^T ||grad u||^2 = int |u_0|^2
    for a velocity trajectory; the dissipation integral uses composite
    Simpson over the sample times."""
    ksq = traj.lattice.ksq
    sums = [kernels.norm_sums(f.coeffs, ksq) for f in traj.fields]
    usq = np.array([s[0] for s in sums])
    diss = np.array([s[1] for s in sums])
    if len(traj) >= 3:
        integral = float(simpson(diss, x=traj.times))
    else:
        integral = float(trapezoid(diss, traj.times))
    lhs = usq[-1] + 2.0 * integral
    rhs = usq[0]
    ctx = {
        "n": traj.lattice.n,
        "samples": len(traj),
        "dt_sample": f"{float(np.median(np.diff(traj.times))):.3g}",
    }
    return _identity_report("energy_identity", lhs, rhs, tolerance, ctx)


def audit_grad_curl(u: SpectralField, tolerance: float = 1e-11) -> AuditReport:
    """sum_i ||grad u_i||^2 = sum_i ||omega_i||^2 for solenoidal mean-free u,
    with the two sides computed through independent routes."""
    require_solenoidal(u, tol=1e-10, what="grad-curl audit input")
    lhs = kernels.norm_sums(u.coeffs, u.lattice.ksq)[1]
    w = kernels.curl_hat(u.coeffs, u.lattice.k2pi)
    rhs = kernels.norm_sums(w, u.lattice.ksq)[0]
    return _identity_report("grad_curl", lhs, rhs, tolerance, {"n": u.lattice.n})


def _parseval_residual(field: SpectralField) -> float:
    phys = _hat_to_phys(field.coeffs, field.lattice)
    grid = float(np.mean(np.sum(phys**2, axis=0)))
    modes = kernels.norm_sums(field.coeffs, field.lattice.ksq)[0]
    return abs(grid - modes) / max(abs(grid), abs(modes), 1e-300)


def audit_identity_suite(
    lattice: Lattice, count: int, seed: int, tolerance: float = 1e-11,
    corrupt_hermitian: bool = False,
) -> list[AuditReport]:
    """Worst-case relative residuals of the spectral identities over
    ``count`` seeded random fields: Parseval, curl(grad)=0, div(curl)=0,
    Leray idempotence/self-adjointness, Biot-Savart left inverse, and the
    grad-curl equality.  ``corrupt_hermitian`` is a sabotage hook for
    testing the detector itself."""
    rng = np.random.default_rng(seed)
    k = lattice.k2pi
    ksq = lattice.ksq
    worst = {
        "parseval": 0.0,
        "curl_of_gradient": 0.0,
        "div_of_curl": 0.0,
        "leray_idempotent": 0.0,
        "leray_self_adjoint": 0.0,
        "biot_savart_inverse": 0.0,
        "grad_curl": 0.0,
    }
    for idx in range(count):
        f = seeded_field(lattice, rng, solenoidal=False)
        if corrupt_hermitian and idx == 0:
            c = f.coeffs.copy()
            c[0, 1, 2, 3] += 0.1
            f = SpectralField(lattice, c)
        worst["parseval"] = max(worst["parseval"], _parseval_residual(f))

        # curl of a gradient vanishes: build grad from component 0 as a scalar
        scal = f.coeffs[0]
        grad = np.empty_like(f.coeffs)
        grad[0] = (1j * k[:, None, None]) * scal
        grad[1] = (1j * k[None, :, None]) * scal
        grad[2] = (1j * k[None, None, :]) * scal
        cg = kernels.curl_hat(np.ascontiguousarray(grad), k)
        scale = max(math.sqrt(kernels.norm_sums(grad, ksq)[1]), 1e-300)
        worst["curl_of_gradient"] = max(
            worst["curl_of_gradient"],
            math.sqrt(kernels.norm_sums(cg, ksq)[0]) / scale,
        )

        dc = kernels.divergence_hat(kernels.curl_hat(f.coeffs, k), k)
        scale = max(math.sqrt(kernels.norm_sums(f.coeffs, ksq)[1]), 1e-300)
        worst["div_of_curl"] = max(
            worst["div_of_curl"], float(np.linalg.norm(dc)) / scale
        )

        p1 = kernels.leray_hat(f.coeffs, k)
        p2 = kernels.leray_hat(p1, k)
        scale = max(math.sqrt(kernels.norm_sums(f.coeffs, ksq)[0]), 1e-300)
        worst["leray_idempotent"] = max(
            worst["leray_idempotent"],
            math.sqrt(kernels.norm_sums(p2 - p1, ksq)[0]) / scale,
        )

        g = seeded_field(lattice, rng, solenoidal=False)
        ip_a = float(np.real(np.vdot(kernels.leray_hat(f.coeffs, k), g.coeffs)))
        ip_b = float(np.real(np.vdot(f.coeffs, kernels.leray_hat(g.coeffs, k))))
        scale = max(abs(ip_a), abs(ip_b), 1e-300)
        worst["leray_self_adjoint"] = max(
            worst["leray_self_adjoint"], abs(ip_a - ip_b) / scale
        )

        w = seeded_field(lattice, rng, solenoidal=True)
        back = kernels.curl_hat(kernels.biot_savart_hat(w.coeffs, k), k)
        scale = max(math.sqrt(kernels.norm_sums(w.coeffs, ksq)[0]), 1e-300)
        worst["biot_savart_inverse"] = max(
            worst["biot_savart_inverse"],
            math.sqrt(kernels.norm_sums(back - w.coeffs, ksq)[0]) / scale,
        )

        s1 = kernels.norm_sums(w.coeffs, ksq)[1]
        ens = kernels.norm_sums(kernels.curl_hat(w.coeffs, k), ksq)[0]
        worst["grad_curl"] = max(
            worst["grad_curl"], abs(s1 - ens) / max(s1, ens, 1e-300)
        )

    ctx = {"n": lattice.n, "fields": count, "seed": seed}
    return [
        AuditReport(name, "identity", res, 0.0, -res, res <= tolerance, tolerance, ctx)
        for name, res in worst.items()
    ]


def spacetime_ratio(a_fields: list[np.ndarray], tau: float, lattice: Lattice) -> float:
    """||w||_L4(Q) / ||w||_H1(Q) for w(x,t) = A_0(x) + sum_{r>0} 2 Re(A_r(x) e^{2 pi i r t / tau})
    on Q = (0, tau) x Omega.  ``a_fields[r]`` holds the (3,n,n,n) spectral
    coefficients of A_r; A_0 must be Hermitian-symmetric.

    L2-type norms are exact mode sums; the L4 integral uses uniform time
    quadrature exact for the trigonometric degree at hand.
    """
    n = lattice.n
    big_r = len(a_fields) - 1
    sq = 0.0
    grad_sq = 0.0
    dt_sq = 0.0
    for r, a in enumerate(a_fields):
        s0, s1 = kernels.norm_sums(np.ascontiguousarray(a), lattice.ksq)
        mult = 1.0 if r == 0 else 2.0
        sq += mult * s0
        grad_sq += mult * s1
        dt_sq += mult * (2.0 * np.pi * r / tau) ** 2 * s0
    h1_sq = tau * (sq + grad_sq + dt_sq)

    nt = 4 * big_r + 2
    fourth = 0.0
    for s in range(nt):
        theta = 2.0 * np.pi * s / nt
        c = a_fields[0].astype(np.complex128).copy()
        for r in range(1, big_r + 1):
            ar = a_fields[r]
            c += ar * np.exp(1j * r * theta) + _conj_reflection(ar) * np.exp(-1j * r * theta)
        phys = sfft.ifftn(c, axes=(-3, -2, -1), norm="forward").real
        fourth += kernels.fourth_moment(np.ascontiguousarray(phys))
    l4 = (tau * fourth / nt) ** 0.25
    return float(l4 / math.sqrt(h1_sq))


def probe_sobolev_constant(
    lattice: Lattice, samples: int, seed: int, t_extent: float
) -> float:
    """Empirical lower bound for the space-time Sobolev constant
    ||w||_L4(Q) <= C ||w||_H1(Q): running max of the ratio over seeded
    random solenoidal space-time fields.  Monotone non-decreasing in
    ``samples`` at fixed seed."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if not t_extent > 0:
        raise ValueError("t_extent must be positive")
    rng = np.random.default_rng(seed)
    big_r = 2
    n = lattice.n
    m = np.abs(lattice.k_index).astype(np.float64)
    mag = np.sqrt(m[:, None, None] ** 2 + m[None, :, None] ** 2 + m[None, None, :] ** 2)
    peak = max(1.0, min(2.0, float(lattice.cutoff)))
    shape = np.exp(-0.5 * ((mag - peak) / (0.5 * peak)) ** 2)
    shape[0, 0, 0] = 0.0

    best = 0.0
    for _ in range(samples):
        a_fields = []
        for r in range(big_r + 1):
            c = rng.standard_normal((3, n, n, n)) + 1j * rng.standard_normal((3, n, n, n))
            c *= shape * lattice.mask
            if r == 0:
                c = 0.5 * (c + _conj_reflection(c))
            c = kernels.leray_hat(np.ascontiguousarray(c), lattice.k2pi)
            c[:, 0, 0, 0] = 0.0
            a_fields.append(c)
        best = max(best, spacetime_ratio(a_fields, t_extent, lattice))
    return best


def scheme_constant_from_probe(probe_value: float) -> float:
    """Scheme constant C from the probe: 2 * probe^2 (the chain uses the
    squared embedding; the factor 2 is a safety margin on top of the
    empirical maximum)."""
    return 2.0 * probe_value**2


def audit_enstrophy_chain(
    run: SlabRunResult, cfg: SchemeConfig, tolerance: float = 1e-9
) -> list[AuditReport]:
    """Per-slab admissibility margins, the multiplicative Gronwall chain
    M_k <= M_{k-1} e^{gamma dt_k}, the global bound M <= K0 e^{gamma T},
    and a pointwise Young-step sanity check u v <= u^2/4 + v^2."""
    gamma = (1.0 - cfg.epsilon0) / cfg.epsilon0
    reports: list[AuditReport] = []
    part = run.partition
    threshold = (1.0 - cfg.epsilon0) / (4.0 * cfg.sobolev_C)
    for k in range(part.slab_count):
        ctx = {"slab": k, "t_a": f"{part.times[k]:.6g}", "t_b": f"{part.times[k+1]:.6g}"}
        reports.append(
            _inequality_report(
                f"admissible_slab{k}", part.kk_star[k], threshold, tolerance, ctx
            )
        )
    m_prev = run.k0
    for k in range(len(run.m_sup)):
        dt_k = part.times[k + 1] - part.times[k]
        bound = m_prev * math.exp(gamma * dt_k)
        reports.append(
            _inequality_report(
                f"gronwall_slab{k}",
                run.m_sup[k],
                bound,
                tolerance * max(1.0, bound),
                {"slab": k},
            )
        )
        m_prev = run.m_sup[k]
    if len(run.m_sup):
        total_t = part.times[-1] - part.times[0]
        global_bound = run.k0 * math.exp(gamma * total_t)
        reports.append(
            _inequality_report(
                "enstrophy_global",
                float(np.max(run.m_sup)),
                global_bound,
                tolerance * max(1.0, global_bound),
                {"K0": f"{run.k0:.6g}", "T": f"{total_t:.6g}"},
            )
        )
    if run.trajectory is not None and len(run.trajectory.fields) > 0:
        f = run.trajectory.fields[len(run.trajectory.fields) // 2]
        phys = _hat_to_phys(f.coeffs, f.lattice)
        a = phys[0].ravel()[::7][:512]
        b = phys[1].ravel()[::7][:512]
        margin = float(np.min(0.25 * a**2 + b**2 - a * b))
        reports.append(
            AuditReport(
                "young_step", "inequality", 0.0, margin, margin,
                margin >= -1e-15, 1e-15, {"points": len(a)},
            )
        )
    return reports


def time_derivative_fields(traj: Trajectory) -> list[np.ndarray]:
    """Second-order finite-difference du/dt coefficients at every sample
    (centered inside, one-sided at the ends); needs uniform spacing."""
    if len(traj) < 3:
        raise ValueError("time-derivative audit needs at least 3 samples")
    dts = np.diff(traj.times)
    h = float(dts[0])
    if np.max(np.abs(dts - h)) > 1e-9 * h:
        raise ValueError("time-derivative audit needs uniform sampling")
    c = [f.coeffs for f in traj.fields]
    out = [(-3.0 * c[0] + 4.0 * c[1] - c[2]) / (2.0 * h)]
    for i in range(1, len(c) - 1):
        out.append((c[i + 1] - c[i - 1]) / (2.0 * h))
    out.append((3.0 * c[-1] - 4.0 * c[-2] + c[-3]) / (2.0 * h))
    return out


def audit_time_derivative_bound(
    traj: Trajectory, tolerance: float = 1e-9
) -> AuditReport:
    """Gronwall bound on the velocity time derivative:
    sum_i ||du_i/dt(t)||^2 <= sum_i ||du_i/dt(0+)||^2 exp(int_0^t phi),
    phi(s) = 27 (sum_i ||omega_i(s)||^2)^2, du/dt by finite differences."""
    ksq = traj.lattice.ksq
    k = traj.lattice.k2pi
    dudt = time_derivative_fields(traj)
    lhs = np.array([kernels.norm_sums(d, ksq)[0] for d in dudt])
    ens = np.array(
        [
            kernels.norm_sums(kernels.curl_hat(f.coeffs, k), ksq)[0]
            for f in traj.fields
        ]
    )
    phi = 27.0 * ens**2
    running = np.concatenate(
        ([0.0], np.cumsum(0.5 * (phi[1:] + phi[:-1]) * np.diff(traj.times)))
    )
    rhs = lhs[0] * np.exp(running)
    margins = rhs[1:] - lhs[1:]
    margin = float(np.min(margins)) if len(margins) else 0.0
    worst = int(np.argmin(margins)) + 1 if len(margins) else 0
    scale = max(1.0, float(lhs[0]))
    return AuditReport(
        "time_derivative_bound",
        "inequality",
        float(lhs[worst]),
        float(rhs[worst]),
        margin,
        margin >= -tolerance * scale,
        tolerance,
        {"samples": len(traj), "dd0": f"{lhs[0]:.6g}"},
    )


def audit_average_convergence(
    u_traj: Trajectory, slab_counts: list[int], slope_floor: float = 0.9
) -> list[AuditReport]:
    """||ubar - u||_{L2(Q)} under uniform N-slab averaging for each N,
    plus the fitted log-log slope against the slab length."""
    lo, hi = u_traj.span
    errors = []
    for n_slabs in slab_counts:
        times = np.linspace(lo, hi, n_slabs + 1)
        total = 0.0
        for k in range(n_slabs):
            bar = slab_average(u_traj, times[k], times[k + 1]).coeffs
            integral, _ = slab_quadrature(
                u_traj,
                float(times[k]),
                float(times[k + 1]),
                lambda c: kernels.norm_sums(c - bar, u_traj.lattice.ksq)[0],
            )
            total += integral
        errors.append(math.sqrt(max(total, 0.0)))

    reports = [
        AuditReport(
            f"avg_error_N{n_slabs}", "info", err, 0.0, 0.0, True, 0.0,
            {"slabs": n_slabs},
        )
        for n_slabs, err in zip(slab_counts, errors)
    ]
    if max(errors) <= 1e-13:
        reports.append(
            AuditReport(
                "avg_convergence_slope", "inequality", slope_floor, math.inf,
                math.inf, True, 0.0, {"note": "errors at roundoff"},
            )
        )
        return reports
    dts = (hi - lo) / np.asarray(slab_counts, dtype=np.float64)
    slope = float(np.polyfit(np.log(dts), np.log(errors), 1)[0])
    reports.append(
        AuditReport(
            "avg_convergence_slope", "inequality", slope_floor, slope,
            slope - slope_floor, slope >= slope_floor, 0.0,
            {"counts": "/".join(str(c) for c in slab_counts)},
        )
    )
    return reports
