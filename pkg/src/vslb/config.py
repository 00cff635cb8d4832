"""Run configuration: INI-style sections, strict about unknown keys.

Sections mirror the domain objects ([lattice], [ic], [solver], [scheme])
plus [run] (seed, output_dir), [audit] and [converge] options.  Unknown
sections or keys are errors so typos fail fast; every value error names
the offending section.key.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .errors import ConfigError
from .fields import Lattice
from .initial import ICSpec
from .slab import SchemeConfig
from .solver import SolverConfig

_SCHEMA: dict[str, set[str]] = {
    "run": {"seed", "output_dir"},
    "lattice": {"n", "dealias_fraction"},
    "ic": {"kind", "amplitude", "seed", "spectrum_slope", "peak_index"},
    "solver": {"dt", "t_end", "viscosity", "sample_stride", "form"},
    "scheme": {
        "epsilon0",
        "sobolev_c",
        "picard_tol",
        "picard_max_iter",
        "initial_slab_count",
        "max_refinements",
    },
    "audit": {"samples", "t_extent", "fields"},
    "converge": {"slab_counts", "scheme_slab_counts"},
}


@dataclass(frozen=True)
class RunConfig:
    seed: int
    output_dir: str
    lattice: Lattice
    ic: ICSpec
    solver: SolverConfig
    epsilon0: float
    sobolev_c: float | None  # None = derive from the auditor's probe
    picard_tol: float
    picard_max_iter: int
    initial_slab_count: int
    max_refinements: int
    audit_samples: int
    audit_t_extent: float
    audit_fields: int
    converge_counts: list[int] = field(default_factory=list)
    scheme_counts: list[int] = field(default_factory=list)

    def scheme_config(self, sobolev_c: float) -> SchemeConfig:
        return SchemeConfig(
            epsilon0=self.epsilon0,
            sobolev_C=sobolev_c,
            picard_tol=self.picard_tol,
            picard_max_iter=self.picard_max_iter,
            initial_slab_count=self.initial_slab_count,
            max_refinements=self.max_refinements,
        )


class _Section:
    def __init__(self, parser: configparser.ConfigParser, name: str):
        self.name = name
        self.raw = dict(parser[name]) if parser.has_section(name) else {}

    def _parse(self, key: str, default, conv, kind: str):
        if key not in self.raw:
            if default is _REQUIRED:
                raise ConfigError(f"{self.name}.{key}: required key is missing")
            return default
        text = self.raw[key].strip()
        try:
            return conv(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"{self.name}.{key}: invalid {kind} {text!r}") from exc

    def get_int(self, key, default=None):
        return self._parse(key, default, int, "integer")

    def get_float(self, key, default=None):
        return self._parse(key, default, float, "float")

    def get_str(self, key, default=None):
        return self._parse(key, default, str, "string")

    def get_fraction(self, key, default=None):
        return self._parse(key, default, Fraction, "fraction")

    def get_int_list(self, key, default=None):
        return self._parse(
            key, default, lambda s: [int(p) for p in s.split(",") if p.strip()],
            "integer list",
        )


_REQUIRED = object()


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc.message.splitlines()[0]}") from exc

    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        for key in parser[section]:
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {section}.{key}")

    run = _Section(parser, "run")
    lattice_s = _Section(parser, "lattice")
    ic_s = _Section(parser, "ic")
    solver_s = _Section(parser, "solver")
    scheme_s = _Section(parser, "scheme")
    audit_s = _Section(parser, "audit")
    conv_s = _Section(parser, "converge")

    try:
        lattice = Lattice(
            n=lattice_s.get_int("n", _REQUIRED),
            dealias_fraction=lattice_s.get_fraction("dealias_fraction", Fraction(2, 3)),
        )
    except ValueError as exc:
        raise ConfigError(f"lattice: {exc}") from exc

    try:
        ic = ICSpec(
            kind=ic_s.get_str("kind", _REQUIRED),
            amplitude=ic_s.get_float("amplitude", 1.0),
            seed=ic_s.get_int("seed", 0),
            spectrum_slope=ic_s.get_float("spectrum_slope", -2.0),
            peak_index=ic_s.get_int("peak_index", 2),
        )
    except ValueError as exc:
        raise ConfigError(f"ic: {exc}") from exc

    solver = SolverConfig(
        lattice=lattice,
        dt=solver_s.get_float("dt", _REQUIRED),
        t_end=solver_s.get_float("t_end", _REQUIRED),
        viscosity=solver_s.get_float("viscosity", 1.0),
        sample_stride=solver_s.get_int("sample_stride", 1),
        form=solver_s.get_str("form", "velocity"),
    )

    sobolev_text = scheme_s.get_str("sobolev_c", "auto").strip().lower()
    if sobolev_text == "auto":
        sobolev_c = None
    else:
        try:
            sobolev_c = float(sobolev_text)
        except ValueError as exc:
            raise ConfigError(
                f"scheme.sobolev_c: expected 'auto' or a float, got {sobolev_text!r}"
            ) from exc
        if not sobolev_c > 0:
            raise ConfigError("scheme.sobolev_c: must be positive")

    epsilon0 = scheme_s.get_float("epsilon0", 0.5)
    picard_tol = scheme_s.get_float("picard_tol", 1e-10)
    picard_max_iter = scheme_s.get_int("picard_max_iter", 60)
    initial_slab_count = scheme_s.get_int("initial_slab_count", 4)
    max_refinements = scheme_s.get_int("max_refinements", 10)
    # instantiate once with a placeholder C so range errors surface at parse time
    SchemeConfig(
        epsilon0=epsilon0,
        sobolev_C=sobolev_c if sobolev_c is not None else 1.0,
        picard_tol=picard_tol,
        picard_max_iter=picard_max_iter,
        initial_slab_count=initial_slab_count,
        max_refinements=max_refinements,
    )

    audit_samples = audit_s.get_int("samples", 20)
    if audit_samples < 1:
        raise ConfigError(f"audit.samples: must be >= 1, got {audit_samples}")
    audit_t_extent = audit_s.get_float("t_extent", 0.1)
    if not audit_t_extent > 0:
        raise ConfigError("audit.t_extent: must be positive")
    audit_fields = audit_s.get_int("fields", 25)
    if audit_fields < 1:
        raise ConfigError(f"audit.fields: must be >= 1, got {audit_fields}")

    converge_counts = conv_s.get_int_list("slab_counts", [4, 8, 16, 32])
    scheme_counts = conv_s.get_int_list("scheme_slab_counts", [4, 8, 16])
    for name, counts in (("slab_counts", converge_counts),
                         ("scheme_slab_counts", scheme_counts)):
        if len(counts) < 2 or any(c < 1 for c in counts):
            raise ConfigError(f"converge.{name}: need >= 2 positive slab counts")

    seed = run.get_int("seed", 0)
    if seed < 0:
        raise ConfigError(f"run.seed: must be non-negative, got {seed}")

    return RunConfig(
        seed=seed,
        output_dir=run.get_str("output_dir", "out"),
        lattice=lattice,
        ic=ic,
        solver=solver,
        epsilon0=epsilon0,
        sobolev_c=sobolev_c,
        picard_tol=picard_tol,
        picard_max_iter=picard_max_iter,
        initial_slab_count=initial_slab_count,
        max_refinements=max_refinements,
        audit_samples=audit_samples,
        audit_t_extent=audit_t_extent,
        audit_fields=audit_fields,
        converge_counts=converge_counts,
        scheme_counts=scheme_counts,
    )
