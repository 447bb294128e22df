import json
import time
from pathlib import Path

import pytest

import minimaxuq
from minimaxuq.cli import main
from minimaxuq.errors import InfeasibleProbe, ParseError, SchemaError
from minimaxuq.specfile import validate

DEMOS = Path(minimaxuq.__file__).parent / "demos"

PROBLEM1 = """
kind: ouq_bound
domain: ["0", "1"]
constraints:
  - {g: identity, relation: "<=", bound: "0.25"}
qoi: {kind: tail_probability, f: identity, threshold: "0.5"}
solver: {restarts: 8}
"""


def run(tmp_path, text, *flags):
    spec = tmp_path / "spec.yaml"
    spec.write_text(text)
    out = tmp_path / "out"
    code = main(["run", "--spec", str(spec), "--out", str(out), *flags])
    report = out / "report.json"
    return code, (json.loads(report.read_text()) if report.exists() else None), out


class TestValidate:
    def test_problem1(self):
        spec = validate(PROBLEM1)
        assert spec.kind == "ouq_bound" and spec.a_set.n_constraints == 1

    def test_missing_qoi(self):
        with pytest.raises(SchemaError) as exc:
            validate(PROBLEM1.replace('qoi: {kind: tail_probability, f: identity, threshold: "0.5"}', ""))
        assert exc.value.path == "qoi"

    def test_zero_step(self):
        text = (DEMOS / "bernoulli_minimax.yaml").read_text().replace('weight_step: "0.1"', "weight_step: 0")
        with pytest.raises(SchemaError, match="positive step required"):
            validate(text)

    def test_parse_error(self):
        with pytest.raises(ParseError):
            validate("kind: [unclosed")

    def test_infeasible_probe(self):
        with pytest.raises(InfeasibleProbe):
            validate(PROBLEM1.replace('bound: "0.25"', 'bound: "-1"'))

    def test_unknown_function(self):
        with pytest.raises(SchemaError) as exc:
            validate(PROBLEM1.replace("g: identity", "g: nope"))
        assert exc.value.path == "constraints[0].g"

    def test_function_must_cover_grid(self):
        text = PROBLEM1.replace("g: identity", 'g: [["0", "0"], ["0.5", "0.5"]]')
        with pytest.raises(SchemaError, match="not tabulated"):
            validate(text)

    def test_cli_validate(self, capsys):
        assert main(["validate", "--spec", str(DEMOS / "problem1.yaml")]) == 0
        assert "ok: ouq_bound" in capsys.readouterr().out


class TestRun:
    def test_problem1(self, tmp_path):
        code, rep, out = run(tmp_path, PROBLEM1)
        assert code == 0
        assert rep["results"]["upper"]["value"] == pytest.approx(0.5, abs=1e-9)
        assert rep["results"]["lower"]["value"] == 0.0
        assert (out / "restarts.csv").read_text().startswith("sense,restart,best_value")

    def test_reproducible(self, tmp_path):
        (tmp_path / "a").mkdir()
        (tmp_path / "b").mkdir()
        _, r1, _ = run(tmp_path / "a", PROBLEM1, "--seed", "7")
        _, r2, _ = run(tmp_path / "b", PROBLEM1, "--seed", "7")
        assert json.dumps(r1["results"]) == json.dumps(r2["results"])
        assert r1["seed"] == 7

    def test_brittleness_demo_a(self, tmp_path):
        code, rep, _ = run(tmp_path, (DEMOS / "brittleness_a.yaml").read_text())
        assert code == 0
        res = rep["results"]
        assert res["ratio"] == pytest.approx(0.25, abs=1e-9) and res["lower_ok"] and res["upper_ok"]

    def test_confidence_no_data(self, tmp_path):
        code, rep, out = run(tmp_path, (DEMOS / "confidence_nodata.yaml").read_text())
        assert code == 0
        res = rep["results"]
        assert abs(res["gamma_eps"] - 0.5) <= 1e-6
        assert res["estimator"]["values"] == [pytest.approx(0.5, abs=1e-9)]
        assert (out / "gamma_curve.csv").exists()

    def test_csv_format(self, tmp_path):
        spec = tmp_path / "spec.yaml"
        spec.write_text(PROBLEM1)
        assert main(["run", "--spec", str(spec), "--out", str(tmp_path / "o"), "--format", "csv"]) == 0
        text = (tmp_path / "o" / "report.csv").read_text()
        assert "results.upper.value" in text

    def test_uncertified_exit_code(self, tmp_path):
        text = (DEMOS / "bernoulli_minimax.yaml").read_text() + "solver: {gap_tol: 0}\n"
        code, rep, _ = run(tmp_path, text)
        assert code == 2 and rep["certified"] is False

    def test_error_exit_code(self, tmp_path, capsys):
        code, rep, _ = run(tmp_path, PROBLEM1.replace('bound: "0.25"', 'bound: "-1"'))
        assert code == 1 and rep is None
        assert "InfeasibleProbe" in capsys.readouterr().err

    def test_flag_overrides(self, tmp_path):
        code, rep, _ = run(tmp_path, PROBLEM1, "--restarts", "3", "--seed", "2")
        assert len(rep["results"]["upper"]["trace"]["best_per_restart"]) == 3

    @pytest.mark.parametrize("name", sorted(p.name for p in DEMOS.glob("*.yaml")))
    def test_shipped_demos(self, tmp_path, name):
        start = time.perf_counter()
        code, rep, _ = run(tmp_path, (DEMOS / name).read_text())
        assert code == 0 and rep["certified"]
        assert time.perf_counter() - start < 60
