import csv
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from reprologit.core import InferenceConfig, ValidationError
from reprologit.harness import (
    Scenario,
    ingest_csv,
    report_tables,
    run_scenario,
    summarize_records,
)

TINY = Scenario("tiny", n=80, p=20, s=2, d=5, beta_nonzero=(4.0, 3.0),
                replications=3, n_new=2, m=20)
TINY_CONFIG = InferenceConfig(alpha=0.95, d=5, m=20, seed=123, loss="logistic")


@pytest.fixture(scope="module")
def tiny_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("tiny_run")
    report = run_scenario(TINY, TINY_CONFIG, out, n_jobs=1, replications=1,
                          coef_noise_count=3)
    return out, report


class TestRunScenario:
    def test_smoke_single_replication(self, tiny_run):
        out, report = tiny_run
        assert len(report.records) == 1
        rec = report.records[0]
        for key in ("candidate", "model_ci", "coef", "oracle_coef", "joint",
                    "case_prob", "oracle_joint", "oracle_case_prob"):
            assert key in rec, key
        assert rec["candidate"]["cardinality"] >= 1
        assert isinstance(rec["model_ci"]["contains_true"], bool)
        assert len(rec["coef"]["per_j"]) == 2 + 3  # signal + sampled noise
        assert (out / "records.jsonl").exists()
        assert (out / "summary.csv").exists()

    def test_deterministic_records(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        run_scenario(TINY, TINY_CONFIG, out1, n_jobs=1, replications=2,
                     coef_noise_count=2)
        run_scenario(TINY, TINY_CONFIG, out2, n_jobs=1, replications=2,
                     coef_noise_count=2)
        assert (out1 / "records.jsonl").read_bytes() == (out2 / "records.jsonl").read_bytes()

    def test_thread_count_invariant(self, tmp_path):
        out1, out2 = tmp_path / "t1", tmp_path / "t4"
        run_scenario(TINY, TINY_CONFIG, out1, n_jobs=1, replications=3,
                     coef_noise_count=2)
        run_scenario(TINY, TINY_CONFIG, out2, n_jobs=4, replications=3,
                     coef_noise_count=2)
        assert (out1 / "records.jsonl").read_bytes() == (out2 / "records.jsonl").read_bytes()

    def test_crash_resume_skips_done_records(self, tmp_path):
        out = tmp_path / "resume"
        run_scenario(TINY, TINY_CONFIG, out, replications=2, coef_noise_count=2)
        first = (out / "records.jsonl").read_text()
        # rerun with one more replication: the two existing lines are kept
        run_scenario(TINY, TINY_CONFIG, out, replications=3, coef_noise_count=2)
        text = (out / "records.jsonl").read_text()
        assert text.startswith(first)
        assert len(text.strip().splitlines()) == 3

    def test_summary_recomputable_from_records(self, tmp_path):
        out = tmp_path / "recompute"
        report = run_scenario(TINY, TINY_CONFIG, out, replications=2,
                              coef_noise_count=2)
        records = [json.loads(line) for line in
                   (out / "records.jsonl").read_text().splitlines()]
        again = summarize_records(records)
        assert set(again.rows) == set(report.summary.rows)
        for key, (mean, std, n) in report.summary.rows.items():
            m2, s2, n2 = again.rows[key]
            assert abs(mean - m2) < 1e-12 and abs(std - s2) < 1e-12 and n == n2
        # and the CSV cells match the summary exactly
        with (out / "summary.csv").open() as fh:
            rows = list(csv.DictReader(fh))
        for row in rows:
            key = (row["scenario"], row["method"], row["metric"])
            mean, std, n = report.summary.rows[key]
            assert float(row["mean"]) == pytest.approx(mean, abs=1e-12)
            assert float(row["std"]) == pytest.approx(std, abs=1e-12)
            assert int(row["n_reps"]) == n


class TestReportTables:
    def test_single_record_zero_std(self, tiny_run, tmp_path):
        _, report = tiny_run
        path = report_tables(report, "csv", tmp_path / "t.csv")
        with path.open() as fh:
            rows = list(csv.DictReader(fh))
        assert rows
        assert all(float(r["std"]) == 0.0 for r in rows)

    def test_markdown_roundtrips_metric_names(self, tiny_run, tmp_path):
        _, report = tiny_run
        path = report_tables(report, "markdown", tmp_path / "t.md")
        text = path.read_text()
        for (_, _, metric) in report.summary.rows:
            assert f" {metric} " in text

    def test_json_style(self, tiny_run, tmp_path):
        _, report = tiny_run
        path = report_tables(report, "json", tmp_path / "t.json")
        doc = json.loads(path.read_text())
        assert {row["metric"] for row in doc} == {k[2] for k in report.summary.rows}

    def test_unknown_style(self, tiny_run, tmp_path):
        _, report = tiny_run
        with pytest.raises(ValidationError):
            report_tables(report, "yaml", tmp_path / "t.yaml")


def write_csv(path: Path, header, rows):
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


class TestIngestCsv:
    def test_minimal(self, tmp_path):
        path = tmp_path / "d.csv"
        write_csv(path, ["g1", "g2", "label"],
                  [[1.0, 2.0, 0], [2.0, 1.0, 1], [3.0, 3.0, 0]])
        result = ingest_csv(path, "label", apply_filters=False, standardize=False)
        assert result.dataset.n == 3 and result.dataset.p == 2
        assert result.columns == ["g1", "g2"]

    def test_zero_fraction_filter(self, tmp_path):
        rng = np.random.default_rng(0)
        n = 40
        sparse = np.where(rng.random(n) < 0.9, 0.0, 1.0)  # ~90% zeros
        dense = rng.standard_normal(n)
        labels = rng.integers(0, 2, n)
        path = tmp_path / "z.csv"
        write_csv(path, ["sparse", "dense", "label"],
                  np.column_stack([sparse, dense, labels]).tolist())
        result = ingest_csv(path, "label", zero_threshold=0.8,
                            variance_fraction=1.0, standardize=False)
        assert result.columns == ["dense"]

    def test_variance_filter_keeps_top_fraction(self, tmp_path):
        rng = np.random.default_rng(1)
        n, p = 30, 100
        scales = np.linspace(1, 100, p)
        x = rng.standard_normal((n, p))
        x = (x - x.mean(0)) / x.std(0, ddof=1) * scales + 1.0  # exact variances
        labels = rng.integers(0, 2, n)
        header = [f"c{i}" for i in range(p)] + ["label"]
        path = tmp_path / "v.csv"
        write_csv(path, header, np.column_stack([x, labels]).tolist())
        result = ingest_csv(path, "label", variance_fraction=0.1, standardize=False)
        assert result.dataset.p == 10
        # the highest-variance columns are the last ten by construction
        assert result.columns == [f"c{i}" for i in range(90, 100)]

    def test_standardizes_by_default(self, tmp_path):
        rng = np.random.default_rng(2)
        x = rng.standard_normal((25, 3)) * 7 + 3
        labels = rng.integers(0, 2, 25)
        path = tmp_path / "s.csv"
        write_csv(path, ["a", "b", "c", "label"],
                  np.column_stack([x, labels]).tolist())
        result = ingest_csv(path, "label", apply_filters=False)
        assert np.allclose(result.dataset.x.mean(0), 0.0, atol=1e-12)
        assert np.allclose(result.dataset.x.std(0, ddof=1), 1.0, atol=1e-12)

    def test_errors(self, tmp_path):
        path = tmp_path / "bad.csv"
        write_csv(path, ["a", "label"], [[1.0, 0], ["oops", 1]])
        with pytest.raises(ValidationError, match="unparseable cell"):
            ingest_csv(path, "label")
        write_csv(path, ["a", "label"], [[1.0, 0], [2.0, 2]])
        with pytest.raises(ValidationError, match="non-binary label"):
            ingest_csv(path, "label")
        write_csv(path, ["a", "b"], [[1.0, 0.5]])
        with pytest.raises(ValidationError, match="missing label column"):
            ingest_csv(path, "label")
        with pytest.raises(IOError):
            ingest_csv(tmp_path / "nope.csv", "label")


class TestCli:
    def _run(self, *args):
        return subprocess.run(
            [sys.executable, "-m", "reprologit.cli", *args],
            capture_output=True, text=True,
        )

    def test_simulate_and_exit_codes(self, tmp_path):
        out = tmp_path / "sim"
        proc = self._run("simulate", "--scenario", "M1s", "--replications", "1",
                         "--d", "3", "--m", "10", "--noise-coefs", "2",
                         "--seed", "5", "--out", str(out))
        assert proc.returncode == 0, proc.stderr
        run_dirs = list(out.iterdir())
        assert len(run_dirs) == 1
        assert (run_dirs[0] / "records.jsonl").exists()

    def test_validation_exit_code(self, tmp_path):
        proc = self._run("coef-ci", "--data", "no-such-file.csv",
                         "--label", "y", "--j", "0", "--out", str(tmp_path))
        assert proc.returncode == 3  # missing file is an IO error
        bad = tmp_path / "bad.csv"
        bad.write_text("a,label\n1.0,2\n")
        proc = self._run("candidates", "--data", str(bad), "--label", "label",
                         "--out", str(tmp_path))
        assert proc.returncode == 2
        assert "non-binary" in proc.stderr

    def test_candidates_and_coef_ci(self, tmp_path):
        rng = np.random.default_rng(3)
        n = 120
        x = rng.standard_normal((n, 6))
        logits = 3.0 * x[:, 0] - 2.0 * x[:, 1]
        y = (logits + rng.logistic(size=n) > 0).astype(int)
        path = tmp_path / "data.csv"
        header = [f"g{i}" for i in range(6)] + ["label"]
        write_csv(path, header, np.column_stack([x, y]).tolist())

        out = tmp_path / "cands"
        proc = self._run("candidates", "--data", str(path), "--label", "label",
                         "--d", "3", "--no-filter", "--seed", "1",
                         "--out", str(out))
        assert proc.returncode == 0, proc.stderr
        doc = json.loads((out / "candidates.json").read_text())
        assert doc["models"]

        out2 = tmp_path / "ci"
        proc = self._run("coef-ci", "--data", str(path), "--label", "label",
                         "--d", "3", "--no-filter", "--seed", "1",
                         "--j", "g0,1", "--out", str(out2))
        assert proc.returncode == 0, proc.stderr
        doc = json.loads((out2 / "coef_ci.json").read_text())
        assert len(doc["intervals"]) == 2
        assert doc["intervals"][0]["column"] == "g0"

    def test_ingest_command(self, tmp_path):
        rng = np.random.default_rng(4)
        x = rng.standard_normal((20, 4)) + 2
        y = rng.integers(0, 2, 20)
        path = tmp_path / "data.csv"
        write_csv(path, ["a", "b", "c", "d", "label"],
                  np.column_stack([x, y]).tolist())
        out = tmp_path / "ing"
        proc = self._run("ingest", "--data", str(path), "--label", "label",
                         "--no-filter", "--out", str(out))
        assert proc.returncode == 0, proc.stderr
        doc = json.loads((out / "ingest.json").read_text())
        assert doc["n"] == 20 and doc["p"] == 4
        npz = np.load(out / "data.npz")
        assert npz["x"].shape == (20, 4)
