"""CSV emission helpers: 17 significant digits so float64 round-trips,
deterministic bytes for identical inputs."""

from __future__ import annotations

from pathlib import Path

from .audits import AuditReport

AUDIT_HEADER = ["audit", "lhs", "rhs", "margin", "pass", "context"]


def fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_csv(path: str | Path, header: list[str], rows: list[list], footer: str | None = None) -> None:
    lines = [",".join(header)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    if footer is not None:
        lines.append(footer)
    Path(path).write_text("\n".join(lines) + "\n")


def write_audit_csv(path: str | Path, reports: list[AuditReport]) -> None:
    rows = [
        [r.name, r.lhs, r.rhs, r.margin, r.passed, r.context_str()]
        for r in reports
    ]
    write_csv(path, AUDIT_HEADER, rows)
