"""Batch front end.

    vslb reference|slab|audit|converge <config>... [--jobs K] [--out DIR]

Exit codes: 0 ok, 1 config error, 2 blow-up, 3 slab-scheme failure
(Picard non-convergence or admissibility unreachable).  With several
configs, --jobs fans them out to worker threads and the worst exit code
is returned.  VSLB_THREADS caps FFT parallelism, VSLB_NUMBA=0 selects
the pure-numpy kernel path.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import kernels
from .audits import (
    audit_average_convergence,
    audit_energy_identity,
    audit_enstrophy_chain,
    audit_identity_suite,
    probe_sobolev_constant,
    scheme_constant_from_probe,
    AuditReport,
)
from .checkpoint import write_checkpoint
from .config import RunConfig, load_config
from .errors import AdmissibilityError, BlowUpError, ConfigError, PicardFailure
from .fields import SpectralField
from .initial import make_initial
from .operators import curl
from .report import fmt, write_audit_csv, write_csv
from .slab import (
    SchemeConfig,
    l2q_distance,
    run_slab_scheme,
    uniform_partition,
)
from .solver import Trajectory, integrate

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_BLOWUP = 2
EXIT_SCHEME = 3
EXIT_AUDIT = 4  # identity-type audit failed in `vslb audit`

DIAG_HEADER = ["t", "energy", "dissipation", "enstrophy", "energy_residual"]
SLAB_HEADER = [
    "slab_index", "t_a", "t_b", "kk_star", "admissible",
    "picard_iters", "contraction_ratio", "M_k", "bound_value",
]


def _write_metadata(out: Path, cfg: RunConfig, extra: dict | None = None) -> None:
    lines = [
        f"created={datetime.now(timezone.utc).isoformat()}",
        f"backend={kernels.BACKEND}",
        f"seed={cfg.seed}",
    ]
    for k, v in (extra or {}).items():
        lines.append(f"{k}={v}")
    (out / "metadata.txt").write_text("\n".join(lines) + "\n")


def _write_diagnostics(out: Path, records) -> None:
    rows = [
        [r.time, r.energy, r.dissipation, r.enstrophy, r.energy_identity_residual]
        for r in records
    ]
    write_csv(out / "diagnostics.csv", DIAG_HEADER, rows)


def run_reference(cfg: RunConfig, out: Path) -> int:
    ic = make_initial(cfg.ic, cfg.lattice)
    try:
        traj, records = integrate(cfg.solver, ic)
    except BlowUpError as exc:
        if exc.diagnostics:
            _write_diagnostics(out, exc.diagnostics)
        _write_metadata(out, cfg, {"blowup_at": exc.time})
        print(f"vslb reference: blow-up at t={exc.time:.6g}", file=sys.stderr)
        return EXIT_BLOWUP
    _write_diagnostics(out, records)
    write_checkpoint(out / "final_state.vslb", traj.fields[-1], traj.times[-1])
    write_audit_csv(out / "audits.csv", [audit_energy_identity(traj)])
    _write_metadata(out, cfg)
    return EXIT_OK


def _resolve_scheme(cfg: RunConfig) -> tuple[SchemeConfig, float]:
    if cfg.sobolev_c is not None:
        return cfg.scheme_config(cfg.sobolev_c), cfg.sobolev_c
    probe = probe_sobolev_constant(
        cfg.lattice, cfg.audit_samples, cfg.seed, cfg.audit_t_extent
    )
    c = scheme_constant_from_probe(probe)
    return cfg.scheme_config(c), c


def _slab_rows(partition, reports=None, m_sup=None, k0=None, gamma=None):
    rows = []
    m_prev = k0
    for k in range(partition.slab_count):
        t_a, t_b = partition.times[k], partition.times[k + 1]
        row = [k, float(t_a), float(t_b), float(partition.kk_star[k]),
               bool(partition.admissible[k])]
        if reports is not None and k < len(reports):
            rep = reports[k]
            row += [rep.iterations, rep.contraction_ratio]
        else:
            row += ["", ""]
        if m_sup is not None and k < len(m_sup):
            bound = m_prev * math.exp(gamma * (t_b - t_a))
            row += [float(m_sup[k]), float(bound)]
            m_prev = m_sup[k]
        else:
            row += ["", ""]
        rows.append(row)
    return rows


def run_slab(cfg: RunConfig, out: Path) -> int:
    ic = make_initial(cfg.ic, cfg.lattice)
    try:
        u_traj, _records = integrate(cfg.solver, ic)
    except BlowUpError as exc:
        _write_metadata(out, cfg, {"blowup_at": exc.time})
        print(f"vslb slab: reference blow-up at t={exc.time:.6g}", file=sys.stderr)
        return EXIT_BLOWUP

    scheme, c_value = _resolve_scheme(cfg)
    gamma = (1.0 - scheme.epsilon0) / scheme.epsilon0
    omega0 = curl(u_traj.fields[0])
    k0 = float(np.sum(np.abs(omega0.coeffs) ** 2))
    summary = (
        f"# summary,K0={fmt(k0)},epsilon0={fmt(scheme.epsilon0)},C={fmt(c_value)},"
        f"final_bound={fmt(k0 * math.exp(gamma * cfg.solver.t_end))}"
    )

    try:
        result = run_slab_scheme(u_traj, omega0, scheme, viscosity=cfg.solver.viscosity)
    except AdmissibilityError as exc:
        write_csv(out / "slab_report.csv", SLAB_HEADER,
                  _slab_rows(exc.partition), footer=summary)
        reports = audit_enstrophy_chain(
            _empty_run(exc.partition, k0), scheme
        )
        write_audit_csv(out / "audits.csv", reports)
        _write_metadata(out, cfg, {"admissibility": "unreachable",
                                   "stubborn_slabs": exc.stubborn})
        print(f"vslb slab: {exc}", file=sys.stderr)
        return EXIT_SCHEME
    except PicardFailure as exc:
        partial = exc.partial
        write_csv(
            out / "slab_report.csv", SLAB_HEADER,
            _slab_rows(partial.partition, partial.reports + [exc.report],
                       partial.m_sup, k0, gamma),
            footer=summary,
        )
        write_audit_csv(out / "audits.csv", audit_enstrophy_chain(partial, scheme))
        _write_metadata(out, cfg, {"picard_failed_slab": exc.slab_index})
        print(f"vslb slab: {exc}", file=sys.stderr)
        return EXIT_SCHEME

    write_csv(
        out / "slab_report.csv", SLAB_HEADER,
        _slab_rows(result.partition, result.reports, result.m_sup, k0, gamma),
        footer=summary,
    )
    write_audit_csv(out / "audits.csv", audit_enstrophy_chain(result, scheme))
    _write_metadata(out, cfg, {"C": c_value})
    return EXIT_OK


def _empty_run(partition, k0):
    from .slab import SlabRunResult

    return SlabRunResult(None, np.array([]), partition, [], k0)


def _synthetic_decay_trajectory(cfg: RunConfig) -> Trajectory:
    """Seeded random solenoidal field decaying by the exact heat flow;
    cheap smooth data for the averaging-rate audit."""
    from .audits import seeded_field

    rng = np.random.default_rng(cfg.seed + 1)
    base = seeded_field(cfg.lattice, rng, solenoidal=True)
    times = np.linspace(0.0, cfg.audit_t_extent, 33)
    fields = [
        SpectralField(
            cfg.lattice, base.coeffs * np.exp(-cfg.lattice.ksq * t)
        )
        for t in times
    ]
    return Trajectory(times, fields)


def run_audit(cfg: RunConfig, out: Path) -> int:
    corrupt = os.environ.get("VSLB_TEST_CORRUPT_HERMITIAN", "") == "1"
    reports: list[AuditReport] = []
    reports += audit_identity_suite(
        cfg.lattice, cfg.audit_fields, cfg.seed, corrupt_hermitian=corrupt
    )
    probe = probe_sobolev_constant(
        cfg.lattice, cfg.audit_samples, cfg.seed, cfg.audit_t_extent
    )
    reports.append(
        AuditReport(
            "sobolev_probe", "info", probe, scheme_constant_from_probe(probe),
            0.0, True, 0.0,
            {"samples": cfg.audit_samples, "t_extent": cfg.audit_t_extent},
        )
    )
    reports += audit_average_convergence(
        _synthetic_decay_trajectory(cfg), [2, 4, 8]
    )
    write_audit_csv(out / "audits.csv", reports)
    _write_metadata(out, cfg)
    failed = [r for r in reports if r.kind == "identity" and not r.passed]
    if failed:
        print(
            "vslb audit: identity failures: " + ", ".join(r.name for r in failed),
            file=sys.stderr,
        )
        return EXIT_AUDIT
    return EXIT_OK


def run_converge(cfg: RunConfig, out: Path) -> int:
    ic = make_initial(cfg.ic, cfg.lattice)
    try:
        u_traj, _records = integrate(cfg.solver, ic)
    except BlowUpError as exc:
        _write_metadata(out, cfg, {"blowup_at": exc.time})
        return EXIT_BLOWUP

    rows: list[list] = []
    avg_reports = audit_average_convergence(u_traj, cfg.converge_counts)
    for rep in avg_reports:
        if rep.kind == "info":
            rows.append(["ubar_to_u", f"N={rep.context['slabs']}", rep.lhs])
        else:
            rows.append(["ubar_to_u", "slope", rep.rhs])

    scheme, _c = _resolve_scheme(cfg)
    omega0 = curl(u_traj.fields[0])
    lo, hi = u_traj.span
    k2pi = cfg.lattice.k2pi

    def reference_curl(t: float):
        return kernels.curl_hat(
            np.ascontiguousarray(u_traj.interp_coeffs(t)), k2pi
        )

    errors = []
    try:
        for count in cfg.scheme_counts:
            partition = uniform_partition(u_traj, count, scheme)
            result = run_slab_scheme(
                u_traj, omega0, scheme, partition=partition,
                viscosity=cfg.solver.viscosity,
            )
            err = l2q_distance(result.trajectory, reference_curl)
            errors.append(err)
            rows.append(["slab_vs_reference", f"N={count}", err])
    except PicardFailure as exc:
        write_csv(out / "rates.csv", ["study", "param", "value"], rows)
        _write_metadata(out, cfg, {"picard_failed_slab": exc.slab_index})
        print(f"vslb converge: {exc}", file=sys.stderr)
        return EXIT_SCHEME

    if max(errors) > 1e-13:
        dts = (hi - lo) / np.asarray(cfg.scheme_counts, dtype=np.float64)
        slope = float(np.polyfit(np.log(dts), np.log(errors), 1)[0])
    else:
        slope = math.inf
    rows.append(["slab_vs_reference", "order", slope])
    write_csv(out / "rates.csv", ["study", "param", "value"], rows)
    _write_metadata(out, cfg)
    return EXIT_OK


_COMMANDS = {
    "reference": run_reference,
    "slab": run_slab,
    "audit": run_audit,
    "converge": run_converge,
}


def _run_one(command: str, config_path: str, out_override: str | None) -> int:
    try:
        cfg = load_config(config_path)
    except ConfigError as exc:
        print(f"vslb: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(out_override) if out_override else Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        return _COMMANDS[command](cfg, out)
    except ConfigError as exc:
        print(f"vslb: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="vslb",
        description="pseudo-spectral Navier-Stokes slab scheme and estimate auditor",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("configs", nargs="+", help="run configuration file(s)")
        p.add_argument("--jobs", type=int, default=1, help="parallel config runs")
        p.add_argument("--out", default=None, help="output directory override")
    args = parser.parse_args(argv)

    if len(args.configs) == 1:
        return _run_one(args.command, args.configs[0], args.out)

    def job(path: str) -> int:
        sub_out = None
        if args.out:
            sub_out = str(Path(args.out) / Path(path).stem)
        return _run_one(args.command, path, sub_out)

    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        codes = list(pool.map(job, args.configs))
    return max(codes)


if __name__ == "__main__":
    sys.exit(main())
