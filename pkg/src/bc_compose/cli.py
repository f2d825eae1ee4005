"""
Command-line interface.

Boundary conditions use the mini-language

    dirichlet | neumann | robin:<alpha> | mixed:<alpha> | pseudoperiodic:<alpha> | matrix:<path>

where <path> names a JSON record {"re": [[..]], "im": [[..]]} or
{"family": ..., "alpha": ...}.  Exit codes: 0 success, 2 input error,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import contextlib
import json
import math
import sys
from typing import Sequence

import numpy as np

from . import output
from .bc_algebra import (
    BoundaryCondition,
    Regular,
    class_name,
    classify,
    compose,
    from_record,
    make_named,
    to_record,
)
from .errors import ConvergenceFailure
from .evolution import MagneticConfig, magnetic_trotter, trotter_error_sweep
from .grid import INITIAL_STATES, StateGrid
from .spectral import find_spectrum

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3

H2_CONVENTION = (
    "convention: H2 = (-i d/dx + alpha2)^2 (positive sign); "
    "reference e^{-2itH3} with alpha3 = (alpha1 + alpha2)/2 differs from the product by the "
    "global phase -2t(alpha1 - alpha2)^2/4"
)
ASSOCIATIVITY_WARNING = (
    "warning: the star product is not associative for three or more regular arguments; "
    "composing as a left fold ((b1 * b2) * b3) ..."
)

SWEEP_DEFAULTS = {
    "t": 0.05,
    "n_list": [4, 8, 16, 32, 64, 128, 256],
    "cutoff_energy": None,
    "grid_size": 1024,
    "output": None,
    "format": "csv",
    "initial_state": "parabola",
}


class InputError(ValueError):
    """Malformed command-line or configuration input."""


def parse_bc(spec) -> BoundaryCondition:
    """Parse the mini-language string or a JSON record dict."""
    if isinstance(spec, dict):
        return from_record(spec)
    if not isinstance(spec, str):
        raise InputError(f"boundary condition must be a string or record, got {spec!r}")
    name, _, arg = spec.partition(":")
    name = name.strip().lower()
    if name == "matrix":
        if not arg:
            raise InputError("matrix: needs a file path")
        with open(arg, encoding="utf-8") as fh:
            return from_record(json.load(fh))
    if name in ("dirichlet", "neumann"):
        if arg:
            raise InputError(f"{name} takes no angle")
        return make_named(name)
    if name in ("robin", "mixed", "pseudoperiodic"):
        if not arg:
            raise InputError(f"{name} needs an angle, e.g. {name}:0.5")
        return make_named(name, _finite(arg, "alpha"))
    raise InputError(f"unknown boundary condition {spec!r}")


def _finite(value, name: str) -> float:
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise InputError(f"{name} must be a number, got {value!r}") from None
    if not math.isfinite(x):
        raise InputError(f"{name} must be finite, got {value!r}")
    return x


def _positive(value, name: str) -> float:
    x = _finite(value, name)
    if x <= 0:
        raise InputError(f"{name} must be positive, got {value!r}")
    return x


def _positive_int(value, name: str, minimum: int = 1) -> int:
    if isinstance(value, float) and value.is_integer():
        value = int(value)
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise InputError(f"{name} must be an integer >= {minimum}, got {value!r}")
    try:
        n = int(value)
    except ValueError:
        raise InputError(f"{name} must be an integer >= {minimum}, got {value!r}") from None
    if n < minimum:
        raise InputError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return n


@contextlib.contextmanager
def _sink(path):
    if path in (None, "-"):
        yield sys.stdout
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _matrix_record(a: np.ndarray) -> dict:
    return {
        "re": [[float(z.real) + 0.0 for z in row] for row in a],
        "im": [[float(z.imag) + 0.0 for z in row] for row in a],
    }


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_compose(specs: Sequence, out=None) -> int:
    if len(specs) < 2:
        raise InputError("compose needs at least two boundary conditions")
    bcs = [parse_bc(s) for s in specs]
    if len(bcs) >= 3:
        print(ASSOCIATIVITY_WARNING, file=sys.stderr)
    w = compose(*bcs)
    cls = classify(w)
    rec = {"u": to_record(w), "class": class_name(cls)}
    rec["k"] = _matrix_record(cls.k) if isinstance(cls, Regular) else None
    (out or sys.stdout).write(json.dumps(rec) + "\n")
    return EXIT_OK


def cmd_classify(spec, out=None) -> int:
    u = parse_bc(spec)
    cls = classify(u)
    rec = {"u": to_record(u), "class": class_name(cls)}
    if isinstance(cls, Regular):
        rec["k"] = _matrix_record(cls.k)
    elif hasattr(cls, "xi"):
        rec["xi"] = {"re": [float(z.real) + 0.0 for z in cls.xi], "im": [float(z.imag) + 0.0 for z in cls.xi]}
        rec["u2"] = {"re": float(cls.u2.real) + 0.0, "im": float(cls.u2.imag) + 0.0}
    (out or sys.stdout).write(json.dumps(rec) + "\n")
    return EXIT_OK


def cmd_spectrum(spec, e_max, output_path=None, fmt_name="csv") -> int:
    u = parse_bc(spec)
    e_max = _positive(e_max, "e_max")
    basis = find_spectrum(u, e_max)
    with _sink(output_path) as fh:
        output.write_table(fh, output.SPECTRUM_COLUMNS, output.spectrum_rows(basis), fmt_name)
    return EXIT_OK


def load_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise InputError("config must be a JSON object")
    return cfg


def cmd_sweep(cfg: dict) -> int:
    unknown = set(cfg) - set(SWEEP_DEFAULTS) - {"command", "bc_u", "bc_v"}
    if unknown:
        raise InputError(f"unknown config keys: {sorted(unknown)}")
    for key in ("bc_u", "bc_v"):
        if key not in cfg:
            raise InputError(f"config needs {key!r}")
    p = {**SWEEP_DEFAULTS, **cfg}
    u, v = parse_bc(p["bc_u"]), parse_bc(p["bc_v"])
    t = _positive(p["t"], "t")
    if not isinstance(p["n_list"], list) or not p["n_list"]:
        raise InputError("n_list must be a non-empty list")
    n_list = [_positive_int(n, "n_list entry") for n in p["n_list"]]
    if n_list != sorted(n_list):
        raise InputError("n_list must be ascending")
    cutoff = None if p["cutoff_energy"] is None else _positive(p["cutoff_energy"], "cutoff_energy")
    m = _positive_int(p["grid_size"], "grid_size")
    if p["format"] not in ("csv", "json-lines"):
        raise InputError(f"format must be 'csv' or 'json-lines', got {p['format']!r}")
    if p["initial_state"] not in INITIAL_STATES:
        raise InputError(f"initial_state must be one of {sorted(INITIAL_STATES)}")
    psi0 = StateGrid.from_function(INITIAL_STATES[p["initial_state"]], m)

    rows = []
    status = EXIT_OK
    failure = None
    try:
        trotter_error_sweep(u, v, t, n_list, psi0, cutoff, on_row=rows.append)
    except ConvergenceFailure as exc:
        status, failure = EXIT_NUMERICAL, f"{type(exc).__name__}: {exc}"
    with _sink(p["output"]) as fh:
        output.write_table(fh, output.SWEEP_COLUMNS, (output.sweep_row(r) for r in rows), p["format"])
        if failure is not None:
            output.write_footer(fh, [("failure", failure.replace(",", ";").replace("\n", " "))], p["format"])
    if failure is not None:
        print(failure, file=sys.stderr)
    return status


def cmd_magnetic(alpha1, alpha2, t, n_steps, n_modes, output_path=None, fmt_name="csv", single_mode=None) -> int:
    cfg = MagneticConfig(
        _finite(alpha1, "alpha1"),
        _finite(alpha2, "alpha2"),
        _positive(t, "t"),
        _positive_int(n_steps, "n_steps"),
        _positive_int(n_modes, "n_modes", minimum=0),
    )
    c0 = None
    if single_mode is not None:
        n = int(single_mode)
        if abs(n) > cfg.n_modes:
            raise InputError(f"single mode {n} outside [-{cfg.n_modes}, {cfg.n_modes}]")
        c0 = (cfg.mode_numbers == n).astype(complex)
    res = magnetic_trotter(cfg, c0)
    print(H2_CONVENTION, file=sys.stderr)
    with _sink(output_path) as fh:
        output.write_table(fh, output.MAGNETIC_COLUMNS, output.magnetic_rows(cfg, res), fmt_name)
        output.write_footer(fh, output.magnetic_footer(cfg, res), fmt_name)
    return EXIT_OK


def cmd_run(path) -> int:
    """Dispatch a JSON config on its `command` key."""
    cfg = load_config(path)
    command = cfg.get("command")
    if command == "sweep":
        return cmd_sweep(cfg)
    if command == "spectrum":
        return cmd_spectrum(cfg.get("bc"), cfg.get("e_max"), cfg.get("output"), cfg.get("format", "csv"))
    if command == "compose":
        specs = cfg.get("bcs")
        if not isinstance(specs, list):
            raise InputError("compose config needs a list 'bcs'")
        with _sink(cfg.get("output")) as fh:
            return cmd_compose(specs, fh)
    if command == "magnetic":
        return cmd_magnetic(
            cfg.get("alpha1"), cfg.get("alpha2"), cfg.get("t"), cfg.get("n_steps"), cfg.get("n_modes"),
            cfg.get("output"), cfg.get("format", "csv"), cfg.get("single_mode"),
        )
    raise InputError(f"unknown command {command!r} in config")


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bc-compose", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compose", help="compose boundary conditions (left fold)")
    p.add_argument("bcs", nargs="+")

    p = sub.add_parser("classify", help="classify one boundary condition")
    p.add_argument("bc")

    p = sub.add_parser("spectrum", help="eigenpairs up to e_max as CSV")
    p.add_argument("bc")
    p.add_argument("e_max")
    p.add_argument("--output", "-o")
    p.add_argument("--format", default="csv", choices=("csv", "json-lines"))

    p = sub.add_parser("sweep", help="Trotter error sweep from a JSON config")
    p.add_argument("config")

    p = sub.add_parser("magnetic", help="alternating magnetic Hamiltonians on Fourier modes")
    p.add_argument("--alpha1", required=True)
    p.add_argument("--alpha2", required=True)
    p.add_argument("--t", required=True)
    p.add_argument("--n-steps", "-N", default=64)
    p.add_argument("--n-modes", default=32)
    p.add_argument("--single-mode", type=int)
    p.add_argument("--output", "-o")
    p.add_argument("--format", default="csv", choices=("csv", "json-lines"))

    p = sub.add_parser("run", help="run any command from a JSON config with a 'command' key")
    p.add_argument("config")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "compose":
            return cmd_compose(args.bcs)
        if args.command == "classify":
            return cmd_classify(args.bc)
        if args.command == "spectrum":
            return cmd_spectrum(args.bc, args.e_max, args.output, args.format)
        if args.command == "sweep":
            cfg = load_config(args.config)
            if cfg.get("command", "sweep") != "sweep":
                raise InputError(f"config command is {cfg.get('command')!r}, expected 'sweep'")
            return cmd_sweep(cfg)
        if args.command == "magnetic":
            return cmd_magnetic(
                args.alpha1, args.alpha2, args.t, args.n_steps, args.n_modes,
                args.output, args.format, args.single_mode,
            )
        return cmd_run(args.config)
    except ConvergenceFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, KeyError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
