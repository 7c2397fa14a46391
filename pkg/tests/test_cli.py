import csv
import json
from pathlib import Path

import numpy as np
import pytest

from dirac_utm.cli import main

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def linf(out):
    return float(next(r for r in read_csv(out / "errors.csv") if r["kind"] == "linf")["abs_error"])


def small_massive(tmp_path, **quad):
    data = json.loads((CONFIGS / "massive_interface.cfg").read_text())
    data["query"].update({"x_count": 5, "t": [0.5]})
    data["quadrature"].update(quad)
    path = tmp_path / "small.cfg"
    path.write_text(json.dumps(data))
    return path


@pytest.mark.parametrize("name", ["massless_halfline", "massless_finite_short", "massless_finite_long"])
def test_massless_configs_exact(name, tmp_path):
    assert main(["run", str(CONFIGS / f"{name}.cfg"), "--output", str(tmp_path)]) == 0
    assert linf(tmp_path) <= 1e-12
    report = (tmp_path / "report.txt").read_text()
    assert "massless transport" in report


def test_empty_data_gives_zero_solution(tmp_path):
    assert main(["run", str(CONFIGS / "empty_data.cfg"), "--output", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "solution.csv")
    assert rows and all(float(r["re"]) == 0.0 and float(r["im"]) == 0.0 for r in rows)


def test_config_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text('{"geometry": {"kind": "two_half_lines", "T": 1.0},\n "masses": {"m1": 1, "m2": 1},\n'
                   ' "query": {"x_left": [-1, 0], "x_right": [0, 1], "t": [1.0]},\n "colour": 1}')
    assert main(["run", str(bad), "--output", str(tmp_path / "o")]) == 1
    assert "line 4" in capsys.readouterr().err


def test_solver_error_exit_code(tmp_path, capsys):
    cfg = small_massive(tmp_path, tail_tolerance=1e-15, k_max_limit=64.0)
    assert main(["run", str(cfg), "--output", str(tmp_path / "o")]) == 2
    assert "solver error" in capsys.readouterr().err


def test_threads_are_deterministic_and_outputs_written(tmp_path):
    cfg = small_massive(tmp_path)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", str(cfg), "--output", str(a), "--dump-traces", "--diagnostics"]) == 0
    assert main(["run", str(cfg), "--output", str(b), "--threads", "4"]) == 0
    assert (a / "solution.csv").read_bytes() == (b / "solution.csv").read_bytes()
    assert linf(a) <= 1e-3
    for name in ("traces.csv", "mesh.csv", "terms.csv", "report.txt"):
        assert (a / name).stat().st_size > 0
    report = (a / "report.txt").read_text()
    assert "term lists: corrected" in report and "printed: linf" in report


def test_printed_variant_selected_without_flag(tmp_path):
    data = json.loads(small_massive(tmp_path).read_text())
    data["erratum_fixes"] = False
    path = tmp_path / "printed.cfg"
    path.write_text(json.dumps(data))
    assert main(["run", str(path), "--output", str(tmp_path / "p")]) == 0
    assert "term lists: printed" in (tmp_path / "p" / "report.txt").read_text()
    assert main(["run", str(path), "--erratum-fixes", "--output", str(tmp_path / "c")]) == 0
    assert "term lists: corrected" in (tmp_path / "c" / "report.txt").read_text()


def test_convergence_massless(tmp_path):
    assert main(["convergence", str(CONFIGS / "massless_halfline.cfg"), "--output", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "convergence.csv")
    assert len(rows) == 3
    # transport along characteristics is exact on every level
    assert all(float(r["self_diff"]) <= 1e-12 for r in rows[:-1])
    assert all(float(r["utm_error"]) <= 1e-12 for r in rows)


def test_convergence_massive(tmp_path):
    cfg = small_massive(tmp_path)
    assert main(["convergence", str(cfg), "--output", str(tmp_path / "c")]) == 0
    rows = read_csv(tmp_path / "c" / "convergence.csv")
    orders = [float(r["conservation_order"]) for r in rows[1:]]
    assert all(1.8 <= o <= 2.2 for o in orders)
    errs = np.array([float(r["utm_error"]) for r in rows])
    assert np.all(np.diff(errs) <= 1e-6)
    assert [int(r["panels"]) for r in rows] == [8, 16, 32]


def test_convergence_rejects_two_levels(tmp_path):
    assert main(["convergence", str(CONFIGS / "massless_halfline.cfg"), "--levels", "2",
                 "--output", str(tmp_path)]) == 1
