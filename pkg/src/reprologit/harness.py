"""Simulation harness and data ingestion.

Runs seeded replications of the full pipeline (data generation, candidate
set, model confidence set, coefficient intervals, joint and case-probability
membership) for the built-in scenarios, writing one JSON line per
replication plus a mean/std summary table, and ingests real CSV data with
the zero-fraction and variance filters.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .candidate import build_candidate_set
from .coef_inference import ci_single_coef, region_abeta, region_case_probs
from .core import (
    CandidateSet,
    ColumnScale,
    Dataset,
    InferenceConfig,
    LinearTarget,
    SupportSet,
    ThetaPoint,
    ValidationError,
    standardize_columns,
    validate_dataset,
)
from .model_confidence import model_confidence_set
from .sampler import RngStream, draw_ar_gaussian, draw_logistic, synth_response
from .stats_util import SummaryTable

__all__ = [
    "Scenario",
    "RunReport",
    "SCENARIOS",
    "REPLICATION_STREAM_STRIDE",
    "run_scenario",
    "run_replication",
    "summarize_records",
    "report_tables",
    "IngestResult",
    "ingest_csv",
]

# Stream-id layout inside one replication's namespace.
REPLICATION_STREAM_STRIDE = 1 << 24
_STREAM_X = 0
_STREAM_NOISE = 1
# offset 2 is reserved by the model-confidence stage
_STREAM_XNEW = 3
_STREAM_COEF_PICK = 4


@dataclass(frozen=True)
class Scenario:
    """A simulation design: true support is the first s coordinates."""

    name: str
    n: int
    p: int
    s: int
    d: int
    beta_nonzero: tuple[float, ...]
    rho: float = 0.2
    rho_new: float = 0.3
    n_new: int = 2
    replications: int = 100
    alpha: float = 0.95
    m: int = 100
    augmented: bool = False

    def __post_init__(self):
        if not 1 <= self.s <= self.p:
            raise ValidationError(f"need 1 <= s <= p, got s={self.s}, p={self.p}")
        if len(self.beta_nonzero) != self.s:
            raise ValidationError(
                f"beta_nonzero has length {len(self.beta_nonzero)}, expected s={self.s}"
            )
        if self.replications < 1 or self.n_new < 1:
            raise ValidationError("replications and n_new must be >= 1")

    @property
    def true_support(self) -> SupportSet:
        return SupportSet(tuple(range(self.s)))

    @property
    def true_theta(self) -> ThetaPoint:
        return ThetaPoint(support=self.true_support,
                          coef=np.asarray(self.beta_nonzero, dtype=float))

    def beta_dense(self) -> np.ndarray:
        return self.true_theta.dense(self.p)


# Full-scale designs plus desk-scale analogues (suffix "s") that keep the
# signal shapes while shrinking (n, p, d, replications) to workstation size.
SCENARIOS: dict[str, Scenario] = {
    "M1": Scenario("M1", n=400, p=1000, s=4, d=4000, beta_nonzero=(5, 4, 3, 2)),
    "M2": Scenario("M2", n=500, p=1000, s=4, d=2000, beta_nonzero=(5, 4, 3, 2)),
    "M3": Scenario("M3", n=700, p=1000, s=4, d=10000, beta_nonzero=(5, 4, 3, 1)),
    "M4": Scenario("M4", n=900, p=1000, s=4, d=10000, beta_nonzero=(5, 4, 3, 1)),
    "M5": Scenario("M5", n=300, p=500, s=6, d=10000,
                   beta_nonzero=(5, 4, 3, 1, 0.5, 0.2), augmented=True),
    "M1s": Scenario("M1s", n=200, p=50, s=4, d=50, beta_nonzero=(5, 4, 3, 2),
                    replications=50),
    "M2s": Scenario("M2s", n=300, p=150, s=4, d=100, beta_nonzero=(5, 4, 3, 2),
                    replications=50),
    "M3s": Scenario("M3s", n=350, p=150, s=4, d=100, beta_nonzero=(5, 4, 3, 1),
                    replications=50),
    "M4s": Scenario("M4s", n=450, p=150, s=4, d=100, beta_nonzero=(5, 4, 3, 1),
                    replications=50),
    "M5s": Scenario("M5s", n=300, p=200, s=6, d=100,
                    beta_nonzero=(5, 4, 3, 1, 0.5, 0.2), replications=30,
                    augmented=True),
}


@dataclass
class RunReport:
    scenario: Scenario
    records: list[dict]
    summary: SummaryTable


def _noise_coef_indices(scenario: Scenario, stream: RngStream, count: int) -> list[int]:
    pool = scenario.p - scenario.s
    if pool <= 0 or count <= 0:
        return []
    count = min(count, pool)
    gen = stream.generator()
    picked = gen.choice(pool, size=count, replace=False) + scenario.s
    return sorted(int(j) for j in picked)


def _coef_record(data: Dataset, cands: CandidateSet, j: int, alpha: float,
                 beta_true: float, augmented: bool) -> dict:
    union = ci_single_coef(data, cands, j, alpha, augmented=augmented)
    return {
        "j": j,
        "covered": bool(union.contains(beta_true)),
        "length": union.measure,
    }


def run_replication(
    scenario: Scenario,
    config: InferenceConfig,
    r: int,
    coef_noise_count: int = 20,
    skip_model_ci: bool = False,
    skip_coef: bool = False,
    skip_regions: bool = False,
    inner_jobs: int = 1,
) -> dict:
    """Run one seeded replication and return its JSON-ready record."""
    base = r * REPLICATION_STREAM_STRIDE
    theta0 = scenario.true_theta
    beta_dense = scenario.beta_dense()

    x = draw_ar_gaussian(RngStream(config.seed, base + _STREAM_X),
                         scenario.n, scenario.p, scenario.rho)
    eps_rel = draw_logistic(RngStream(config.seed, base + _STREAM_NOISE), scenario.n)
    y = synth_response(x, theta0, eps_rel)
    data = validate_dataset(x, y)

    record: dict = {
        "scenario": scenario.name,
        "seed": config.seed,
        "r": r,
        "loss": config.loss,
        "alpha": config.alpha,
        "augmented": scenario.augmented,
    }

    cands = build_candidate_set(data, config, n_jobs=inner_jobs, stream_base=base)
    record["candidate"] = {
        "cardinality": len(cands),
        "contains_true": scenario.true_support in cands,
        "failed_draws": cands.failed_draws,
    }

    if not skip_model_ci:
        kept, _reports = model_confidence_set(data, cands, config,
                                              n_jobs=inner_jobs, stream_base=base)
        kept_set = {m.indices for m in kept}
        record["model_ci"] = {
            "cardinality": len(kept),
            "contains_true": scenario.true_support.indices in kept_set,
            "subset_of_candidates": all(m in cands for m in kept),
        }

    oracle_cands = CandidateSet(models=(scenario.true_support,))

    if not skip_coef:
        noise_js = _noise_coef_indices(
            scenario, RngStream(config.seed, base + _STREAM_COEF_PICK), coef_noise_count
        )
        signal_js = list(scenario.true_support.indices)
        per_j = []
        oracle_per_j = []
        for j in signal_js + noise_js:
            is_signal = j in scenario.true_support
            row = _coef_record(data, cands, j, config.alpha, beta_dense[j],
                               augmented=scenario.augmented)
            row["signal"] = is_signal
            per_j.append(row)
            orow = _coef_record(data, oracle_cands, j, config.alpha, beta_dense[j],
                                augmented=not is_signal)
            orow["signal"] = is_signal
            oracle_per_j.append(orow)
        record["coef"] = {"per_j": per_j, "noise_indices": noise_js}
        record["oracle_coef"] = {"per_j": oracle_per_j}

    if not skip_regions:
        joint = region_abeta(data, cands, LinearTarget.identity(scenario.p), config.alpha)
        record["joint"] = {"covered": bool(joint.membership(beta_dense))}
        joint_oracle = region_abeta(data, oracle_cands,
                                    LinearTarget.identity(scenario.p), config.alpha)
        record["oracle_joint"] = {"covered": bool(joint_oracle.membership(beta_dense))}

        x_new = draw_ar_gaussian(RngStream(config.seed, base + _STREAM_XNEW),
                                 scenario.n_new, scenario.p, scenario.rho_new)
        t_true = x_new @ beta_dense
        case = region_case_probs(data, cands, x_new, config.alpha)
        record["case_prob"] = {"covered": bool(case.membership_logits(t_true))}
        case_oracle = region_case_probs(data, oracle_cands, x_new, config.alpha)
        record["oracle_case_prob"] = {"covered": bool(case_oracle.membership_logits(t_true))}

    return record


def _replication_task(args) -> dict:
    """Module-level worker so replication fan-out can use processes (the
    solver mix holds the GIL too much for threads to scale)."""
    scenario, config, r, coef_noise_count, candidates_only = args
    return run_replication(scenario, config, r,
                           coef_noise_count=coef_noise_count,
                           skip_model_ci=candidates_only,
                           skip_coef=candidates_only,
                           skip_regions=candidates_only,
                           inner_jobs=1)


def summarize_records(records: list[dict]) -> SummaryTable:
    """Aggregate replication records into (scenario, method, metric) cells."""
    values: dict[tuple[str, str, str], list[float]] = {}

    def add(scenario: str, method: str, metric: str, value) -> None:
        if value is None:
            return
        v = float(value)
        if math.isfinite(v):
            values.setdefault((scenario, method, metric), []).append(v)

    for rec in records:
        scen = rec["scenario"]
        method = f"repro-{rec['loss']}"
        cand = rec.get("candidate")
        if cand:
            add(scen, method, "candidate_coverage", cand["contains_true"])
            add(scen, method, "candidate_cardinality", cand["cardinality"])
        mci = rec.get("model_ci")
        if mci:
            add(scen, method, "model_ci_coverage", mci["contains_true"])
            add(scen, method, "model_ci_cardinality", mci["cardinality"])
            add(scen, method, "model_ci_subset", mci["subset_of_candidates"])
        for key, meth in (("coef", method), ("oracle_coef", "oracle")):
            coef = rec.get(key)
            if not coef:
                continue
            for group, flag in (("signal", True), ("noise", False)):
                rows = [row for row in coef["per_j"] if row["signal"] == flag]
                if rows:
                    add(scen, meth, f"coef_coverage_{group}",
                        np.mean([row["covered"] for row in rows]))
                    add(scen, meth, f"coef_length_{group}",
                        np.mean([row["length"] for row in rows]))
        if rec.get("joint"):
            add(scen, method, "joint_coverage", rec["joint"]["covered"])
        if rec.get("oracle_joint"):
            add(scen, "oracle", "joint_coverage", rec["oracle_joint"]["covered"])
        if rec.get("case_prob"):
            add(scen, method, "caseprob_coverage", rec["case_prob"]["covered"])
        if rec.get("oracle_case_prob"):
            add(scen, "oracle", "caseprob_coverage", rec["oracle_case_prob"]["covered"])

    return SummaryTable.from_values(values)


def _record_line(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


def run_scenario(
    scenario: Scenario,
    config: InferenceConfig,
    out_dir: str | Path,
    n_jobs: int = 1,
    replications: int | None = None,
    coef_noise_count: int = 20,
    candidates_only: bool = False,
) -> RunReport:
    """Run (or resume) the replications of a scenario.

    Records append to <out_dir>/records.jsonl in replication order; a rerun
    with the same out_dir skips replications already present (keyed by
    scenario, seed, r).  The summary lands in <out_dir>/summary.csv.
    """
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IOError(f"cannot create output directory {out_dir}: {exc}") from exc
    total = replications if replications is not None else scenario.replications

    records_path = out_dir / "records.jsonl"
    existing: dict[int, dict] = {}
    if records_path.exists():
        with records_path.open() as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                rec = json.loads(line)
                if rec.get("scenario") == scenario.name and rec.get("seed") == config.seed:
                    existing[int(rec["r"])] = rec

    todo = [r for r in range(total) if r not in existing]

    tasks = [(scenario, config, r, coef_noise_count, candidates_only) for r in todo]

    # Records stream to disk in replication order as results arrive, so an
    # interrupted run resumes from the completed prefix; a single writer
    # serializes the file access.
    fresh: dict[int, dict] = {}
    if todo:
        with records_path.open("a") as fh:
            if n_jobs > 1 and len(todo) > 1:
                with ProcessPoolExecutor(max_workers=n_jobs) as pool:
                    for r, rec in zip(todo, pool.map(_replication_task, tasks)):
                        fresh[r] = rec
                        fh.write(_record_line(rec) + "\n")
                        fh.flush()
            else:
                for task in tasks:
                    rec = _replication_task(task)
                    fresh[task[2]] = rec
                    fh.write(_record_line(rec) + "\n")
                    fh.flush()

    records = [existing.get(r, fresh.get(r)) for r in range(total)]
    records = [rec for rec in records if rec is not None]
    summary = summarize_records(records)
    report = RunReport(scenario=scenario, records=records, summary=summary)
    report_tables(report, "csv", out_dir / "summary.csv")
    return report


def report_tables(report: RunReport, style: str, path: str | Path) -> Path:
    """Render the summary table as csv, json, or markdown."""
    if not report.records:
        raise ValidationError("empty report: nothing to render")
    path = Path(path)
    items = report.summary.sorted_items()
    if style == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["scenario", "method", "metric", "mean", "std", "n_reps"])
        for (scen, method, metric), (mean, std, n) in items:
            # repr round-trips float64 exactly, keeping the CSV recomputable
            writer.writerow([scen, method, metric, repr(mean), repr(std), n])
        text = buf.getvalue()
    elif style == "json":
        text = json.dumps(
            [
                {"scenario": scen, "method": method, "metric": metric,
                 "mean": mean, "std": std, "n_reps": n}
                for (scen, method, metric), (mean, std, n) in items
            ],
            indent=2, sort_keys=True,
        ) + "\n"
    elif style == "markdown":
        lines = ["| scenario | method | metric | mean(std) | n |",
                 "| --- | --- | --- | --- | --- |"]
        for (scen, method, metric), (mean, std, n) in items:
            lines.append(f"| {scen} | {method} | {metric} | {mean:.4f}({std:.4f}) | {n} |")
        text = "\n".join(lines) + "\n"
    else:
        raise ValidationError(f"unknown table style {style!r}")
    try:
        path.write_text(text)
    except OSError as exc:
        raise IOError(f"cannot write {path}: {exc}") from exc
    return path


@dataclass
class IngestResult:
    """A parsed, filtered, optionally standardized dataset with the names of
    the surviving columns."""

    dataset: Dataset
    columns: list[str]
    scale: ColumnScale | None
    label_column: str

    def column_map(self) -> dict[int, str]:
        return dict(enumerate(self.columns))

    def transform_new(self, x_new: np.ndarray, columns: list[str]) -> np.ndarray:
        """Project new rows onto the surviving columns (by name) and apply
        the training standardization."""
        pos = {name: i for i, name in enumerate(columns)}
        missing = [c for c in self.columns if c not in pos]
        if missing:
            raise ValidationError(f"new data is missing columns: {missing[:5]}")
        x_new = np.asarray(x_new, dtype=float)
        out = x_new[:, [pos[c] for c in self.columns]]
        if self.scale is not None:
            out = (out - self.scale.mean) / self.scale.scale
        return out


def ingest_csv(
    path: str | Path,
    label_column: str,
    delimiter: str = ",",
    zero_threshold: float = 0.8,
    variance_fraction: float = 0.1,
    apply_filters: bool = True,
    standardize: bool = True,
) -> IngestResult:
    """Parse a headered CSV into a Dataset.

    Columns whose zero fraction exceeds zero_threshold are dropped first,
    then only the top variance_fraction of the remaining columns is kept;
    finally the survivors are standardized (both steps optional).
    """
    path = Path(path)
    if not path.exists():
        raise IOError(f"no such file: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError("empty CSV: header row required") from None
        header = [h.strip() for h in header]
        if label_column not in header:
            raise ValidationError(f"missing label column {label_column!r}")
        label_idx = header.index(label_column)
        feat_names = [h for i, h in enumerate(header) if i != label_idx]
        rows = []
        labels = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValidationError(
                    f"line {lineno}: expected {len(header)} cells, got {len(row)}"
                )
            try:
                vals = [float(cell) for i, cell in enumerate(row) if i != label_idx]
                lab = float(row[label_idx])
            except ValueError:
                raise ValidationError(f"line {lineno}: unparseable cell") from None
            rows.append(vals)
            labels.append(lab)
    if not rows:
        raise ValidationError("CSV contains no data rows")
    x = np.asarray(rows, dtype=float)
    y = np.asarray(labels)
    if not np.all(np.isin(y, (0.0, 1.0))):
        raise ValidationError("non-binary label column")
    y = y.astype(np.int64)

    keep = np.arange(x.shape[1])
    if apply_filters:
        zero_frac = np.mean(x == 0.0, axis=0)
        keep = keep[zero_frac <= zero_threshold]
        if keep.size == 0:
            raise ValidationError("zero-fraction filter removed every column")
        variances = x[:, keep].var(axis=0, ddof=1) if x.shape[0] > 1 else np.zeros(keep.size)
        n_keep = max(1, int(round(variance_fraction * keep.size)))
        order = np.lexsort((keep, -variances))  # variance desc, index asc on ties
        keep = np.sort(keep[order[:n_keep]])

    x = x[:, keep]
    names = [feat_names[i] for i in keep]
    data = validate_dataset(x, y)
    scale = None
    if standardize:
        data, scale = standardize_columns(data)
    return IngestResult(dataset=data, columns=names, scale=scale,
                        label_column=label_column)
