import csv
import io
import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from bc_compose import cli
from bc_compose.errors import ConvergenceFailure
from bc_compose.evolution import SweepRow

FIXTURES = Path(__file__).parent / "fixtures"


def run(argv, capsys):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def _csv(text):
    return list(csv.DictReader(io.StringIO(text)))


# compose / classify

def test_compose_examples(capsys):
    code, out, _ = run(["compose", "dirichlet", "neumann"], capsys)
    rec = json.loads(out)
    assert code == 0 and rec["class"] == "FullDirichlet" and rec["k"] is None
    assert rec["u"]["re"] == [[-1.0, 0.0], [0.0, -1.0]]

    code, out, _ = run(["compose", "neumann", "neumann"], capsys)
    rec = json.loads(out)
    assert rec["class"] == "Regular" and rec["u"]["re"] == [[1.0, 0.0], [0.0, 1.0]]
    assert np.all(np.array(rec["k"]["re"]) == 0)

    _, out, _ = run(["compose", "pseudoperiodic:0.3", "pseudoperiodic:1.1"], capsys)
    assert json.loads(out)["class"] == "FullDirichlet"


def test_compose_three_warns(capsys):
    code, out, err = run(["compose", "robin:1", "neumann", "robin:2"], capsys)
    assert code == 0 and "not associative" in err and "left fold" in err
    assert json.loads(out)["class"] == "Regular"


def test_compose_needs_two(capsys):
    code, _, err = run(["compose", "neumann"], capsys)
    assert code == 2 and "at least two" in err


def test_classify_with_matrix_file(capsys):
    code, out, _ = run(["classify", f"matrix:{FIXTURES / 'matrix.json'}"], capsys)
    rec = json.loads(out)
    assert code == 0 and rec["class"] in ("Regular", "OneSingular")


# spectrum

def test_spectrum_examples(capsys):
    code, out, _ = run(["spectrum", "dirichlet", 100], capsys)
    rows = _csv(out)
    assert code == 0 and len(rows) == 3
    energies = [float(r["energy"]) for r in rows]
    assert np.allclose(energies, [(n * math.pi) ** 2 for n in (1, 2, 3)], rtol=1e-12)
    assert list(rows[0]) == ["index", "energy", "kind", "re_a", "im_a", "re_b", "im_b", "bc_residual"]

    _, out, _ = run(["spectrum", "neumann", 1], capsys)
    rows = _csv(out)
    assert len(rows) == 1 and float(rows[0]["energy"]) == 0 and rows[0]["kind"] == "zero"

    _, out, _ = run(["spectrum", "robin:1.5707963", 10], capsys)
    assert sum(float(r["energy"]) < 0 for r in _csv(out)) == 1


def test_spectrum_json_lines(capsys, tmp_path):
    dest = tmp_path / "s.jsonl"
    code, out, _ = run(["spectrum", "dirichlet", 50, "--format", "json-lines", "-o", dest], capsys)
    lines = dest.read_text().splitlines()
    assert code == 0 and out == "" and len(lines) == 2
    assert json.loads(lines[1])["index"] == 1


# magnetic

def test_magnetic_example(capsys):
    code, out, err = run(["magnetic", "--alpha1", 0, "--alpha2", 1, "--t", 0.3], capsys)
    assert code == 0 and "positive sign" in err
    footer = dict(line.split(",") for line in out.splitlines()[-3:])
    assert abs(float(footer["fidelity"]) - 1) < 1e-12
    assert abs(float(footer["phase"]) + 0.15) < 1e-10
    assert abs(float(footer["analytic_phase"]) + 0.15) < 1e-15


def test_magnetic_equal_fluxes(capsys):
    _, out, _ = run(["magnetic", "--alpha1", 0.5, "--alpha2", 0.5, "--t", 0.2], capsys)
    footer = dict(line.split(",") for line in out.splitlines()[-3:])
    assert abs(float(footer["fidelity"]) - 1) < 1e-12 and abs(float(footer["phase"])) < 1e-12


def test_magnetic_single_mode(capsys):
    a1, a2, t = 0.2, -0.4, 0.5
    _, out, _ = run(["magnetic", "--alpha1", a1, "--alpha2", a2, "--t", t, "--single-mode", 1, "--n-modes", 2], capsys)
    row = [r for r in _csv("\n".join(out.splitlines()[:-3])) if r["n_mode"] == "1"][0]
    k = 2 * math.pi
    expected = complex(math.cos(-t * ((k + a1) ** 2 + (k + a2) ** 2)), math.sin(-t * ((k + a1) ** 2 + (k + a2) ** 2)))
    assert abs(complex(float(row["re_final"]), float(row["im_final"])) - expected) < 1e-12


# sweep

def test_sweep_identical_config(capsys):
    code, out, _ = run(["sweep", FIXTURES / "sweep_identical.json"], capsys)
    rows = _csv(out)
    assert code == 0 and [r["N"] for r in rows] == ["1", "4", "16"]
    assert all(float(r["l2_error"]) <= 1e-9 and float(r["time_averaged_error"]) <= 1e-9 for r in rows)


def test_sweep_pseudoperiodic_json_lines(capsys):
    code, out, _ = run(["run", FIXTURES / "sweep_pseudoperiodic.json"], capsys)
    recs = [json.loads(line) for line in out.splitlines()]
    assert code == 0 and [r["N"] for r in recs] == [16, 64]
    assert set(recs[0]) == {"N", "l2_error", "time_averaged_error", "unitarity_defect", "boundary_mag_0", "boundary_mag_1"}


def test_sweep_failure_writes_partial_rows(capsys, monkeypatch):
    def failing(u, v, t, n_list, psi0, cutoff, on_row=None):
        on_row(SweepRow(4, 0.1, 0.2, 0.0, 0.3, 0.4))
        raise ConvergenceFailure("root refinement stalled")

    monkeypatch.setattr(cli, "trotter_error_sweep", failing)
    code, out, err = run(["sweep", FIXTURES / "sweep_neumann_dirichlet.json"], capsys)
    lines = out.splitlines()
    assert code == 3
    assert lines[1].startswith("4,") and lines[-1].startswith("failure,ConvergenceFailure")
    assert "stalled" in err


# exit-code contract

@pytest.mark.parametrize(
    "argv",
    [
        ["spectrum", "torus", "10"],
        ["spectrum", "robin", "10"],
        ["spectrum", "robin:abc", "10"],
        ["spectrum", "dirichlet:0.3", "10"],
        ["spectrum", "neumann", "-5"],
        ["spectrum", "neumann", "nan"],
        ["classify", "matrix:/nonexistent.json"],
        ["magnetic", "--alpha1", "0", "--alpha2", "inf", "--t", "1"],
        ["magnetic", "--alpha1", "0", "--alpha2", "1", "--t", "1", "-N", "0"],
        ["magnetic", "--alpha1", "0", "--alpha2", "1", "--t", "1", "--n-modes", "2", "--single-mode", "5"],
        ["sweep", str(FIXTURES / "bad_unknown_key.json")],
        ["sweep", str(FIXTURES / "bad_negative_t.json")],
        ["sweep", str(FIXTURES / "bad_resolution.json")],
        ["sweep", str(FIXTURES / "bad_syntax.json")],
        ["sweep", str(FIXTURES / "magnetic.json")],
        ["run", str(FIXTURES / "bad_command.json")],
        ["run", "/nonexistent/config.json"],
    ],
)
def test_malformed_input_exit_code(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 2 and err.startswith("error:")


def test_argparse_usage_error_exits_2():
    with pytest.raises(SystemExit) as exc:
        cli.main(["spectrum"])
    assert exc.value.code == 2


# determinism

FIXTURE_RUNS = [
    "sweep_identical.json",
    "sweep_neumann_dirichlet.json",
    "sweep_pseudoperiodic.json",
    "sweep_truncated.json",
    "spectrum.json",
    "compose.json",
    "magnetic.json",
]


@pytest.mark.parametrize("name", FIXTURE_RUNS)
def test_fixture_runs_are_byte_identical(name, capsys):
    first = run(["run", FIXTURES / name], capsys)
    second = run(["run", FIXTURES / name], capsys)
    assert first[0] == 0 and first == second and first[1]


def test_output_file_matches_stdout(tmp_path, capsys):
    cfg = json.loads((FIXTURES / "sweep_identical.json").read_text())
    cfg["output"] = str(tmp_path / "out.csv")
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    _, stdout, _ = run(["run", FIXTURES / "sweep_identical.json"], capsys)
    code, out, _ = run(["run", path], capsys)
    assert code == 0 and out == "" and (tmp_path / "out.csv").read_text() == stdout


def test_thread_count_does_not_change_output(capsys, monkeypatch):
    outputs = []
    for threads in ("1", "4"):
        monkeypatch.setenv("BC_COMPOSE_THREADS", threads)
        outputs.append(run(["run", FIXTURES / "sweep_neumann_dirichlet.json"], capsys)[1])
    assert outputs[0] == outputs[1]


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "bc_compose", "compose", "dirichlet", "neumann"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and json.loads(proc.stdout)["class"] == "FullDirichlet"
