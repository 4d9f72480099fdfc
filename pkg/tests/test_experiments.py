import csv
import io
import json

import jsonschema
import numpy as np
import pytest

from mixer_chain import cli
from mixer_chain.bfs import NODE_BUDGET_ENV
from mixer_chain.experiments import (
    ExperimentConfig,
    estimate_exponent,
    fit_power_law,
    mixer_batch,
    two_sample_chi2,
    variance_band,
    verify_claim,
    verify_conditional_law,
    verify_domination,
    verify_mirror,
    verify_sandwich,
    verify_words,
)
from mixer_chain.report import COLUMNS, Check, Report, report_schema, to_csv, to_json

SMALL = ExperimentConfig(seed=3, trials=40, t_grid=(64, 128, 256))


def statuses(report):
    return {c.name: c.status for c in report.checks}


def validate(report):
    doc = json.loads(to_json(report))
    jsonschema.validate(doc, report_schema())
    return doc


class TestConfig:
    @pytest.mark.parametrize("kw", [
        {"t_grid": ()}, {"t_grid": (4, 2)}, {"trials": 0}, {"workers": 0}, {"output_format": "xml"},
    ])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            ExperimentConfig(**kw)

    def test_tolerance_override(self):
        assert ExperimentConfig(tolerances={"a": 2}).tol("a", 1.0) == 2.0
        assert ExperimentConfig().tol("a", 1.0) == 1.0


class TestBatch:
    def test_workers_do_not_change_results(self):
        a = mixer_batch(200, [100, 200], [0, 1], seed=5, n=150, workers=1)
        b = mixer_batch(200, [100, 200], [0, 1], seed=5, n=150, workers=3)
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x, y)

    def test_fit_power_law(self):
        t = np.array([1, 2, 4, 8.0])
        fit = fit_power_law(t, 3 * t**0.75)
        assert fit["slope"] == pytest.approx(0.75) and fit["prefactor"] == pytest.approx(3)
        assert fit_power_law([1], [1])["slope"] is None


class TestExponent:
    def test_few_trials_warn(self):
        r = estimate_exponent(ExperimentConfig(seed=1, trials=1, t_grid=(256, 1024, 2048)))
        assert any("unstable" in w for w in r.warnings)
        assert all(s == "inconclusive" for n, s in statuses(r).items() if n.startswith("slope_"))
        validate(r)

    def test_small_run(self):
        r = estimate_exponent(SMALL)
        assert len(r.rows) == 3
        assert statuses(r)["sandwich_coherence"] == "pass"
        assert any("fitting over the whole grid" in w for w in r.warnings)
        validate(r)


class TestSandwich:
    def test_radius_1(self):
        r = verify_sandwich(1)
        assert r.passed and [row["count"] for row in r.rows] == [1, 4]
        assert r.rows[1]["min_lower_slack"] == 0  # swaps: lower bound 1 = distance 1

    def test_radius_5(self):
        r = verify_sandwich(5)
        assert r.passed
        assert [row["count"] for row in r.rows] == [1, 4, 10, 23, 50, 106]
        assert r.parameters["spot"] == {"element": "(0,<0,2>)", "lower": 2, "exact": 5, "upper": 24}
        validate(r)


class TestWords:
    def test_small(self):
        r = verify_words(200, 6, seed=2)
        assert r.passed
        assert r.rows[0]["kind"] == "transposition" and r.rows[0]["failures"] == 0
        validate(r)


class TestClaim:
    def test_small_is_inconclusive(self):
        r = verify_claim(50, seed=1)
        assert r.passed
        assert statuses(r)["frequency_0"] == "inconclusive"
        assert statuses(r)["support"] == "pass"
        validate(r)

    def test_censoring_warning(self):
        r = verify_claim(200, seed=1, step_cap=2)
        assert r.parameters["censored"] > 0
        assert any("censored" in w for w in r.warnings)


class TestDomination:
    def test_small_run_reports_exact_gap(self):
        cfg = ExperimentConfig(seed=4, trials=300, probe_sites=(0, 1))
        r = verify_domination(cfg, times=(64,))
        assert {e["z"] for e in r.parameters["exact"]} == {0, 1}
        assert all(row["k"] >= 1 for row in r.rows)
        validate(r)


class TestConditional:
    def test_band(self):
        assert variance_band(1) == (-10.0, 10.0)
        assert variance_band(9, c=2.0) == (4 - 15, 4 + 15)

    def test_small_run(self):
        cfg = ExperimentConfig(seed=4, trials=600, probe_sites=(0,), tolerances={"min_bin": 50})
        r = verify_conditional_law(cfg, times=(64,))
        s = statuses(r)
        assert s["unvisited_fixed_z0_t64"] == "pass"
        assert s["k1_bounded_z0_t64"] == "pass"
        assert r.parameters["sqrt_visit_bounds"][0]["ratio"] > 0
        validate(r)


class TestMirror:
    def test_chi2_identical_samples(self):
        x = np.repeat(np.arange(-5, 6), 30)
        chi2, dof, p, bins = two_sample_chi2(x, x)
        assert chi2 == 0 and p == pytest.approx(1.0) and dof == bins - 1

    def test_chi2_detects_shift(self):
        rng = np.random.default_rng(0)
        a = rng.integers(0, 10, 5000)
        assert two_sample_chi2(a, a + 1)[2] < 1e-6

    def test_small_run(self):
        r = verify_mirror(ExperimentConfig(seed=6, trials=500), t=64)
        assert len(r.rows) == 2
        validate(r)


class TestReport:
    def report(self):
        return Report("claim", {"n": 1}, [{"cell": "a,b", "count": 1, "frequency": float("nan")}],
                      COLUMNS["claim"], {"x": float("inf")}, [Check("c", "pass", "ok")], [])

    def test_bad_status(self):
        with pytest.raises(ValueError):
            Check("c", "maybe")

    def test_json_is_finite_and_valid(self):
        doc = validate(self.report())
        assert doc["parameters"]["x"] is None
        assert doc["rows"][0]["frequency"] is None
        assert doc["schema_version"] == "1.0.0"

    def test_csv_round_trip(self):
        text = to_csv(self.report())
        assert text.endswith("\r\n")
        rows = list(csv.DictReader(io.StringIO(text, newline="")))
        assert rows[0]["cell"] == "a,b" and rows[0]["count"] == "1" and rows[0]["frequency"] == ""
        assert list(rows[0]) == list(COLUMNS["claim"])

    def test_deterministic_modulo_timestamp(self):
        a = to_json(verify_words(50, 5, seed=9), timestamp="T")
        b = to_json(verify_words(50, 5, seed=9), timestamp="T")
        assert a == b
        assert to_csv(verify_claim(300, seed=2)) == to_csv(verify_claim(300, seed=2))


class TestCLI:
    def test_sandwich_csv(self, capsys):
        assert cli.main(["sandwich", "--radius", "4", "--format", "csv"]) == 0
        out = capsys.readouterr().out
        assert out.splitlines()[0] == ",".join(COLUMNS["sandwich"])

    def test_json_to_file(self, tmp_path):
        out = tmp_path / "sub" / "words.json"
        assert cli.main(["words", "--trials", "20", "--max-support", "4", "--out", str(out)]) == 0
        jsonschema.validate(json.loads(out.read_text()), report_schema())

    def test_failing_check_exits_1(self):
        # an impossible frequency tolerance makes the claim checks fail
        args = ["claim", "--trials", "12000", "--seed", "1", "--tol", "frequency=0", "--format", "csv"]
        assert cli.main(args) == 1

    def test_resource_error_exits_2(self):
        assert cli.main(["sandwich", "--radius", "13"]) == 2

    def test_env_budget_exits_2(self, monkeypatch):
        monkeypatch.setenv(NODE_BUDGET_ENV, "10")
        assert cli.main(["sandwich", "--radius", "4"]) == 2

    def test_bad_grid_exits_2(self):
        assert cli.main(["exponent", "--trials", "2", "--grid", "0,-4"]) == 2

    def test_unwritable_output_exits_2(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        assert cli.main(["sandwich", "--radius", "2", "--out", str(blocker / "x.json")]) == 2

    def test_usage_error_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            cli.main(["claim", "--seed", "-1"])
        assert exc.value.code == 2
