"""Slab machinery: averaging quadrature, the frozen-source auxiliary
solve, Picard behaviour, admissibility, and the chained scheme."""

import numpy as np
import pytest

import vslb
from vslb import kernels
from vslb.audits import seeded_field
from vslb.errors import AdmissibilityError, PicardFailure
from vslb.fields import SpectralField, solenoidal_residual
from vslb.operators import l2_norm, to_physical
from vslb.slab import (
    SchemeConfig,
    admissible_partition,
    auxiliary_rhs,
    kk_star,
    l2q_distance,
    picard_slab,
    run_slab_scheme,
    slab_average,
    slab_quadrature,
    solve_auxiliary,
    uniform_partition,
)
from vslb.solver import SolverConfig, Trajectory, integrate

from conftest import rel_l2

TWO_PI = 2.0 * np.pi
LAM = TWO_PI**2


def synthetic_decay_traj(lat, base, rate, t_end, samples):
    times = np.linspace(0.0, t_end, samples)
    fields = [SpectralField(lat, base * np.exp(-rate * t)) for t in times]
    return Trajectory(times, fields)


def zero_traj(lat, t_end=0.1, samples=11):
    z = np.zeros((3, lat.n, lat.n, lat.n), dtype=complex)
    return synthetic_decay_traj(lat, z, 0.0, t_end, samples)


# -------------------------------------------------------------- averaging


def test_slab_average_constant(lat8):
    rng = np.random.default_rng(1)
    base = seeded_field(lat8, rng, solenoidal=True).coeffs
    traj = synthetic_decay_traj(lat8, base, 0.0, 1.0, 5)
    avg = slab_average(traj, 0.0, 1.0)
    assert np.abs(avg.coeffs - base).max() <= 1e-15


def test_slab_average_requires_two_samples(lat8):
    rng = np.random.default_rng(2)
    base = seeded_field(lat8, rng).coeffs
    traj = synthetic_decay_traj(lat8, base, 0.0, 1.0, 5)
    with pytest.raises(ValueError, match="samples"):
        slab_average(traj, 0.05, 0.2)  # no interior sample pair
    with pytest.raises(ValueError, match="span"):
        slab_average(traj, 0.5, 1.5)


def test_slab_average_beltrami_analytic_factor(lat8):
    u0 = vslb.make_initial(vslb.ICSpec("beltrami_abc", 1.0), lat8)
    tau = 0.01
    traj = synthetic_decay_traj(lat8, u0.coeffs, LAM, tau, 1201)
    avg = slab_average(traj, 0.0, tau)
    factor = (1.0 - np.exp(-LAM * tau)) / (LAM * tau)
    assert rel_l2(avg.coeffs, factor * u0.coeffs) <= 1e-8


def test_slab_average_solenoidal(bel16_traj):
    traj, _ = bel16_traj
    avg = slab_average(traj, 0.013, 0.047)
    assert solenoidal_residual(avg) <= 1e-12


def test_average_contraction_inequality(bel16_traj):
    # |avg|^2 <= (1/dt) int |w|^2 per slab, by construction of the quadrature
    traj, _ = bel16_traj
    ksq = traj.lattice.ksq
    for (a, b) in [(0.0, 0.025), (0.025, 0.05), (0.01, 0.0333), (0.05, 0.1)]:
        avg = slab_average(traj, a, b)
        lhs = kernels.norm_sums(avg.coeffs, ksq)[0]
        integral, _ = slab_quadrature(
            traj, a, b, lambda c: kernels.norm_sums(c, ksq)[0]
        )
        rhs = integral / (b - a)
        assert rhs - lhs >= -1e-10 * max(rhs, 1.0)


def test_average_l2q_stability(bel16_traj):
    # sum_k dt_k |avg_k|^2 <= int_0^T |w|^2 for a full partition
    traj, _ = bel16_traj
    ksq = traj.lattice.ksq
    lo, hi = traj.span
    times = np.linspace(lo, hi, 9)
    lhs = 0.0
    for a, b in zip(times, times[1:]):
        avg = slab_average(traj, a, b)
        lhs += (b - a) * kernels.norm_sums(avg.coeffs, ksq)[0]
    rhs, _ = slab_quadrature(traj, lo, hi, lambda c: kernels.norm_sums(c, ksq)[0])
    assert rhs - lhs >= -1e-10 * max(rhs, 1.0)


# ---------------------------------------------------------- auxiliary rhs


def test_auxiliary_rhs_zero_vorticity(lat16):
    rng = np.random.default_rng(3)
    u = seeded_field(lat16, rng, solenoidal=True)
    z = SpectralField(lat16, np.zeros_like(u.coeffs))
    assert np.abs(auxiliary_rhs(u, z).coeffs).max() == 0.0


def test_auxiliary_rhs_beltrami_pair_cancels(lat16):
    u = vslb.make_initial(vslb.ICSpec("beltrami_abc", 1.0), lat16)
    w = SpectralField(lat16, TWO_PI * u.coeffs)
    src = auxiliary_rhs(u, w)
    scale = np.abs(u.coeffs).max()
    assert np.abs(src.coeffs).max() <= 1e-10 * scale


def test_auxiliary_rhs_integration_by_parts(lat16):
    # the two rearrangement chains, evaluated directly on the grid; with
    # cutoff 5 and n=16 the triple products are integrated exactly
    rng = np.random.default_rng(4)
    wt = seeded_field(lat16, rng, solenoidal=True)  # the evolving field
    ub = seeded_field(lat16, rng, solenoidal=True)
    wb = seeded_field(lat16, rng, solenoidal=True)
    k = lat16.k2pi
    kx = [k[:, None, None], k[None, :, None], k[None, None, :]]

    def grid(c):
        return to_physical(SpectralField(lat16, np.ascontiguousarray(c)))

    def dgrid(c, j):
        return grid(np.stack([1j * kx[j] * c[comp] for comp in range(3)]))

    wt_g, ub_g, wb_g = grid(wt.coeffs), grid(ub.coeffs), grid(wb.coeffs)
    dwb = [dgrid(wb.coeffs, j) for j in range(3)]
    dwt = [dgrid(wt.coeffs, j) for j in range(3)]
    dub = [dgrid(ub.coeffs, j) for j in range(3)]

    # transport chain: int wt_i (ub.grad) wb_i = -int wb_i (ub.grad) wt_i
    a = sum(
        np.mean(wt_g[..., i] * ub_g[..., j] * dwb[j][..., i])
        for i in range(3)
        for j in range(3)
    )
    b = -sum(
        np.mean(wb_g[..., i] * ub_g[..., j] * dwt[j][..., i])
        for i in range(3)
        for j in range(3)
    )
    assert abs(a - b) <= 1e-10 * max(abs(a), abs(b), 1.0)

    # stretching chain: int wt_i (wb.grad) ub_i = -int ub_i (wb.grad) wt_i
    c1 = sum(
        np.mean(wt_g[..., i] * wb_g[..., j] * dub[j][..., i])
        for i in range(3)
        for j in range(3)
    )
    c2 = -sum(
        np.mean(ub_g[..., i] * wb_g[..., j] * dwt[j][..., i])
        for i in range(3)
        for j in range(3)
    )
    assert abs(c1 - c2) <= 1e-10 * max(abs(c1), abs(c2), 1.0)

    # and the packaged source agrees with the direct advective evaluation
    direct = np.stack(
        [
            sum(-ub_g[..., j] * dwb[j][..., i] + wb_g[..., j] * dub[j][..., i]
                for j in range(3))
            for i in range(3)
        ],
        axis=-1,
    )
    from vslb.operators import leray_project, to_spectral

    want = leray_project(vslb.dealias(to_spectral(direct, lat16)))
    got = auxiliary_rhs(ub, wb)
    wc = want.coeffs.copy()
    wc[:, 0, 0, 0] = 0.0
    assert rel_l2(got.coeffs, wc) <= 1e-10


# ------------------------------------------------------------ heat solve


def test_solve_auxiliary_pure_decay(lat16):
    u = vslb.make_initial(vslb.ICSpec("beltrami_abc", 1.0), lat16)
    z = SpectralField(lat16, np.zeros_like(u.coeffs))
    traj = solve_auxiliary(u, z, 0.0, 0.02, 1e-3)
    exact = np.exp(-LAM * 0.02) * u.coeffs
    assert rel_l2(traj.fields[-1].coeffs, exact) <= 1e-13


def test_solve_auxiliary_steady_state(lat16):
    rng = np.random.default_rng(5)
    s = seeded_field(lat16, rng, solenoidal=True)
    sc = s.coeffs.copy()
    sc[:, 0, 0, 0] = 0.0
    s = SpectralField(lat16, sc)
    z = SpectralField(lat16, np.zeros_like(s.coeffs))
    t_b = 0.75
    traj = solve_auxiliary(z, s, 0.0, t_b, 0.05)
    with np.errstate(divide="ignore", invalid="ignore"):
        expect = np.where(
            lat16.ksq > 0,
            (1.0 - np.exp(-lat16.ksq * t_b)) / np.where(lat16.ksq > 0, lat16.ksq, 1.0),
            0.0,
        ) * s.coeffs
    assert np.abs(traj.fields[-1].coeffs - expect).max() <= 1e-12


def test_solve_auxiliary_vs_rk4_oracle(lat8):
    # independent classical RK4 on the per-mode linear ODE
    rng = np.random.default_rng(6)
    w0 = seeded_field(lat8, rng, solenoidal=True)
    s = seeded_field(lat8, rng, solenoidal=True)
    sc = s.coeffs.copy()
    sc[:, 0, 0, 0] = 0.0
    t_b = 0.01
    traj = solve_auxiliary(w0, SpectralField(lat8, sc), 0.0, t_b, t_b / 4)

    lam = lat8.ksq
    c = w0.coeffs.copy()
    c[:, 0, 0, 0] = 0.0
    dt = t_b / 1000.0

    def f(y):
        return -lam * y + sc

    for _ in range(1000):
        k1 = f(c)
        k2 = f(c + 0.5 * dt * k1)
        k3 = f(c + 0.5 * dt * k2)
        k4 = f(c + dt * k3)
        c = c + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    c[:, 0, 0, 0] = 0.0
    assert rel_l2(traj.fields[-1].coeffs, c) <= 1e-9


# ----------------------------------------------------------------- picard


def test_picard_zero_fixed_point(lat16, bel16_traj):
    traj, _ = bel16_traj
    z = SpectralField(lat16, np.zeros((3, 16, 16, 16), dtype=complex))
    cfg = SchemeConfig(sobolev_C=0.1)
    slab_traj, report = picard_slab(traj, z, 0.0, 0.01, cfg)
    assert report.converged and report.iterations == 1
    assert report.residuals == [0.0]
    assert max(np.abs(f.coeffs).max() for f in slab_traj.fields) == 0.0


def test_picard_beltrami_converges(bel16_traj):
    traj, _ = bel16_traj
    w0 = vslb.curl(traj.fields[0])
    cfg = SchemeConfig(sobolev_C=0.1, picard_tol=1e-10)
    slab_traj, report = picard_slab(traj, w0, 0.0, 0.01, cfg)
    assert report.converged
    assert report.contraction_ratio < 1.0
    assert solenoidal_residual(slab_traj.fields[-1]) <= 1e-11


def test_picard_contraction_scales_with_slab_length(tg16_fine_traj):
    # in the resolving regime the worst successive-residual ratio shrinks
    # roughly linearly with slab length
    traj, _ = tg16_fine_traj
    w0 = vslb.curl(traj.fields[0])
    cfg = SchemeConfig(sobolev_C=0.1, picard_tol=1e-12, picard_max_iter=80)
    ratios = []
    for length in (2e-3, 1e-3):
        _, report = picard_slab(traj, w0, 0.0, length, cfg)
        assert report.converged
        ratios.append(report.contraction_ratio)
    factor = ratios[1] / ratios[0]
    assert 0.3 <= factor <= 0.7


def test_picard_weak_form_residual(bel16_traj, lat16):
    # discrete weak form of the slab solution against random solenoidal
    # test fields; time integrals by Simpson on a finely sampled solve
    from scipy.integrate import simpson

    traj, _ = bel16_traj
    t_a, t_b = 0.0, 0.01
    w0 = vslb.curl(traj.fields[0])
    u_bar = slab_average(traj, t_a, t_b)
    cfg = SchemeConfig(sobolev_C=0.1, picard_tol=1e-12)
    _, report = picard_slab(traj, w0, t_a, t_b, cfg)
    assert report.converged
    # rebuild the converged solution with fine output sampling
    w_bar = slab_average(
        solve_auxiliary(w0, auxiliary_rhs(u_bar, slab_average(
            solve_auxiliary(w0, auxiliary_rhs(u_bar, w0), t_a, t_b, 2e-4),
            t_a, t_b)), t_a, t_b, 2e-4),
        t_a, t_b,
    )
    source = auxiliary_rhs(u_bar, w_bar)
    fine = solve_auxiliary(w0, source, t_a, t_b, (t_b - t_a) / 400)

    rng = np.random.default_rng(7)
    ksq = lat16.ksq
    for _ in range(3):
        v = seeded_field(lat16, rng, solenoidal=True)
        bdry = float(
            np.real(np.vdot(fine.fields[-1].coeffs - fine.fields[0].coeffs, v.coeffs))
        )
        grad_ip = [
            float(np.real(np.vdot(f.coeffs * ksq, v.coeffs))) for f in fine.fields
        ]
        src_ip = float(np.real(np.vdot(source.coeffs, v.coeffs)))
        integral = float(simpson(grad_ip, x=fine.times))
        resid = bdry + integral - src_ip * (t_b - t_a)
        scale = max(abs(bdry), abs(integral), abs(src_ip) * (t_b - t_a), 1e-30)
        assert abs(resid) <= 1e-8 * scale


# ------------------------------------------------------------ partitions


def test_admissible_partition_zero_trajectory(lat8):
    traj = zero_traj(lat8)
    cfg = SchemeConfig(sobolev_C=0.5, initial_slab_count=3)
    part = admissible_partition(traj, cfg)
    assert part.slab_count == 3
    assert np.all(part.kk_star == 0.0)
    assert np.all(part.admissible)


def test_admissible_partition_beltrami(bel16_traj):
    traj, _ = bel16_traj
    cfg = SchemeConfig(epsilon0=0.5, sobolev_C=0.1, initial_slab_count=4,
                       max_refinements=12)
    part = admissible_partition(traj, cfg)
    assert np.all(part.admissible)
    thresh = (1.0 - cfg.epsilon0) / (4.0 * cfg.sobolev_C)
    assert np.all(part.kk_star <= thresh + 1e-12)


def test_admissible_partition_monotone_in_C(bel16_traj):
    traj, _ = bel16_traj
    n_slabs = []
    for c_val in (0.1, 0.2):
        cfg = SchemeConfig(sobolev_C=c_val, initial_slab_count=4, max_refinements=12)
        n_slabs.append(admissible_partition(traj, cfg).slab_count)
    assert n_slabs[1] >= n_slabs[0]


def test_admissible_partition_unreachable(lat16):
    ic = vslb.make_initial(vslb.ICSpec("beltrami_abc", 40.0), lat16)
    cfg_solver = SolverConfig(lat16, dt=2e-4, t_end=0.05, sample_stride=2)
    traj, _ = integrate(cfg_solver, ic)
    cfg = SchemeConfig(sobolev_C=0.1, initial_slab_count=4, max_refinements=2)
    with pytest.raises(AdmissibilityError) as exc:
        admissible_partition(traj, cfg)
    assert len(exc.value.stubborn) > 0
    assert not np.all(exc.value.partition.admissible)


def test_kk_star_formula(lat8):
    # constant-in-time field: K* = dt * sup ||u||^2 + dt * ||grad u||^2
    rng = np.random.default_rng(8)
    base = seeded_field(lat8, rng, solenoidal=True).coeffs
    traj = synthetic_decay_traj(lat8, base, 0.0, 1.0, 9)
    s0, s1 = kernels.norm_sums(base, lat8.ksq)
    got = kk_star(traj, 0.0, 0.5)
    assert abs(got - 0.5 * (s0 + s1)) <= 1e-12 * max(got, 1.0)


# ---------------------------------------------------------- whole scheme


def test_run_slab_scheme_zero(lat8):
    traj = zero_traj(lat8)
    z = SpectralField(lat8, np.zeros((3, 8, 8, 8), dtype=complex))
    cfg = SchemeConfig(sobolev_C=0.3, initial_slab_count=3)
    result = run_slab_scheme(traj, z, cfg)
    assert np.all(result.m_sup == 0.0)
    assert result.k0 == 0.0


def test_run_slab_scheme_rejects_inconsistent_omega0(bel16_traj, lat16):
    traj, _ = bel16_traj
    rng = np.random.default_rng(9)
    wrong = seeded_field(lat16, rng, solenoidal=True)
    with pytest.raises(ValueError, match="curl"):
        run_slab_scheme(traj, wrong, SchemeConfig(sobolev_C=0.1))


def test_run_slab_scheme_beltrami_bound(bel16_traj):
    traj, _ = bel16_traj
    w0 = vslb.curl(traj.fields[0])
    cfg = SchemeConfig(epsilon0=0.5, sobolev_C=0.1, initial_slab_count=4,
                       max_refinements=12)
    result = run_slab_scheme(traj, w0, cfg)
    assert all(r.converged for r in result.reports)
    gamma = (1.0 - cfg.epsilon0) / cfg.epsilon0
    bound = result.k0 * np.exp(gamma * (traj.span[1] - traj.span[0]))
    assert result.m_sup.max() <= bound
    # chained trajectory is ordered and spans (0, T)
    assert np.all(np.diff(result.trajectory.times) > 0)
    assert abs(result.trajectory.times[-1] - traj.span[1]) <= 1e-12


def test_run_slab_scheme_picard_failure_carries_partials(bel16_traj):
    traj, _ = bel16_traj
    w0 = vslb.curl(traj.fields[0])
    cfg = SchemeConfig(sobolev_C=0.1, picard_tol=1e-14, picard_max_iter=1,
                       initial_slab_count=4, max_refinements=12)
    with pytest.raises(PicardFailure) as exc:
        run_slab_scheme(traj, w0, cfg)
    assert exc.value.slab_index == 0
    assert not exc.value.report.converged


def test_scheme_tracks_reference(bel16_traj):
    # refinement sanity: L2(Q) distance to curl(u_ref) shrinks with slabs
    traj, _ = bel16_traj
    w0 = vslb.curl(traj.fields[0])
    cfg = SchemeConfig(sobolev_C=0.1, picard_tol=1e-11)
    k2pi = traj.lattice.k2pi

    def ref(t):
        return kernels.curl_hat(np.ascontiguousarray(traj.interp_coeffs(t)), k2pi)

    dists = []
    for count in (4, 8):
        part = uniform_partition(traj, count, cfg)
        result = run_slab_scheme(traj, w0, cfg, partition=part)
        dists.append(l2q_distance(result.trajectory, ref))
    assert dists[1] < dists[0]
