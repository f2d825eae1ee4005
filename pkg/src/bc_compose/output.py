"""Deterministic text output: CSV tables and JSON lines with 17 significant digits."""
from __future__ import annotations

import json
from typing import Iterable, TextIO

from .bc_algebra import BoundaryCondition
from .evolution import MagneticConfig, MagneticResult, SweepRow, expected_magnetic_phase, wrap_phase
from .spectral import SpectralBasis, bc_residual

SPECTRUM_COLUMNS = ("index", "energy", "kind", "re_a", "im_a", "re_b", "im_b", "bc_residual")
SWEEP_COLUMNS = ("N", "l2_error", "time_averaged_error", "unitarity_defect", "boundary_mag_0", "boundary_mag_1")
MAGNETIC_COLUMNS = ("n_mode", "re_final", "im_final", "re_ref", "im_ref")


def fmt(x) -> str:
    """17 significant digits; integers verbatim; negative zero printed as 0."""
    if isinstance(x, (int, str)) and not isinstance(x, bool):
        return str(x)
    return format(float(x) + 0.0, ".17g")


def _plain(x):
    if isinstance(x, float):
        return x + 0.0
    return x


def write_table(out: TextIO, columns: Iterable[str], rows: Iterable[Iterable], fmt_name: str = "csv") -> None:
    columns = tuple(columns)
    if fmt_name == "csv":
        out.write(",".join(columns) + "\n")
        for row in rows:
            out.write(",".join(fmt(v) for v in row) + "\n")
    elif fmt_name == "json-lines":
        for row in rows:
            out.write(json.dumps({c: _plain(v) for c, v in zip(columns, row)}) + "\n")
    else:
        raise ValueError(f"unknown output format {fmt_name!r}; use 'csv' or 'json-lines'")


def write_footer(out: TextIO, records: Iterable[tuple[str, object]], fmt_name: str = "csv") -> None:
    """Trailing key/value records after a table."""
    records = list(records)
    if fmt_name == "csv":
        for key, value in records:
            out.write(f"{key},{fmt(value)}\n")
    else:
        out.write(json.dumps({"footer": {k: _plain(v) for k, v in records}}) + "\n")


def spectrum_rows(basis: SpectralBasis):
    u: BoundaryCondition = basis.bc
    for i, m in enumerate(basis.modes):
        a, b = m.coefficients
        yield (i, m.energy, m.kind.value, a.real, a.imag, b.real, b.imag, bc_residual(u, m.boundary_vector()))


def sweep_row(row: SweepRow) -> tuple:
    return (row.n, row.l2_error, row.time_averaged_error, row.unitarity_defect, row.boundary_mag_0, row.boundary_mag_1)


def magnetic_rows(cfg: MagneticConfig, res: MagneticResult):
    for n, f, r in zip(cfg.mode_numbers, res.final, res.reference):
        yield (int(n), f.real, f.imag, r.real, r.imag)


def magnetic_footer(cfg: MagneticConfig, res: MagneticResult) -> list[tuple[str, float]]:
    return [
        ("fidelity", res.fidelity),
        ("phase", wrap_phase(res.phase)),
        ("analytic_phase", wrap_phase(expected_magnetic_phase(cfg.alpha1, cfg.alpha2, cfg.t))),
    ]
