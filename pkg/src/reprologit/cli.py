"""Command-line interface.

Subcommands: simulate (scenario replications), candidates, model-ci,
coef-ci, case-prob (analyses of a CSV dataset), and ingest (parse/filter
only).  Exit codes: 0 success, 2 validation error, 3 IO error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .candidate import build_candidate_set
from .coef_inference import ci_single_coef, region_case_probs
from .core import InferenceConfig, ValidationError
from .harness import (
    SCENARIOS,
    IngestResult,
    ingest_csv,
    report_tables,
    run_scenario,
)
from .model_confidence import model_confidence_set

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3


def _common_parser() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    g = parent.add_argument_group("common options")
    g.add_argument("--seed", type=int, default=0, help="base RNG seed")
    g.add_argument("--alpha", type=float, default=None,
                   help="coverage target in (0,1); default 0.95")
    g.add_argument("--loss", choices=("logistic", "hinge"), default="logistic")
    g.add_argument("--d", type=int, default=None,
                   help="number of repro draws (default 100, or the scenario's)")
    g.add_argument("--m", type=int, default=None,
                   help="Monte Carlo draws per model score (default 100)")
    g.add_argument("--beta-mode", choices=("mle", "profile"), default="mle")
    g.add_argument("--max-support", type=int, default=None,
                   help="cardinality cap for candidate models")
    g.add_argument("--threads", type=int, default=1)
    g.add_argument("--out", type=str, default="out", help="output directory")
    return parent


def _data_options(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--data", required=True, help="CSV file with a header row")
    sub.add_argument("--label", required=True, help="name of the binary label column")
    sub.add_argument("--delimiter", default=",")
    sub.add_argument("--zero-threshold", type=float, default=0.8)
    sub.add_argument("--variance-fraction", type=float, default=0.1)
    sub.add_argument("--no-filter", action="store_true",
                     help="skip the zero-fraction and variance filters")
    sub.add_argument("--no-standardize", action="store_true")


def _build_parser() -> argparse.ArgumentParser:
    parent = _common_parser()
    parser = argparse.ArgumentParser(
        prog="reprologit",
        description="Repro-sample inference for high-dimensional logistic regression",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sim = subs.add_parser("simulate", parents=[parent],
                          help="run a simulation scenario")
    sim.add_argument("--scenario", required=True, choices=sorted(SCENARIOS),
                     help="M1..M5 full scale, M1s..M5s desk scale")
    sim.add_argument("--replications", type=int, default=None)
    sim.add_argument("--noise-coefs", type=int, default=20,
                     help="number of sampled zero coefficients to evaluate")
    sim.add_argument("--all-coefs", action="store_true",
                     help="evaluate every coefficient's interval, not a sample")
    sim.add_argument("--table-style", choices=("csv", "json", "markdown"), default="csv")

    cand = subs.add_parser("candidates", parents=[parent],
                           help="build the model candidate set for a dataset")
    _data_options(cand)

    mci = subs.add_parser("model-ci", parents=[parent],
                          help="model confidence set (candidates + pruning)")
    _data_options(mci)

    cci = subs.add_parser("coef-ci", parents=[parent],
                          help="confidence set for single coefficients")
    _data_options(cci)
    cci.add_argument("--j", required=True,
                     help="comma-separated coefficient indices or column names")
    cci.add_argument("--augmented", action="store_true",
                     help="adjoin the tested coordinate to every candidate model")

    cp = subs.add_parser("case-prob", parents=[parent],
                         help="simultaneous region for new-observation probabilities")
    _data_options(cp)
    cp.add_argument("--x-new", required=True,
                    help="CSV of new covariate rows (header matching the data columns)")
    cp.add_argument("--prob", required=True,
                    help="comma-separated probability vector to test for membership")

    ing = subs.add_parser("ingest", parents=[parent],
                          help="parse, filter, and standardize a CSV dataset")
    _data_options(ing)

    return parser


def _config_from(args, scenario=None) -> InferenceConfig:
    alpha = args.alpha if args.alpha is not None else (scenario.alpha if scenario else 0.95)
    d = args.d if args.d is not None else (scenario.d if scenario else 100)
    m = args.m if args.m is not None else (scenario.m if scenario else 100)
    return InferenceConfig(
        alpha=alpha, d=d, m=m, loss=args.loss, seed=args.seed,
        max_support=args.max_support, beta_mode=args.beta_mode,
    )


def _ingest_from(args) -> IngestResult:
    return ingest_csv(
        args.data, args.label, delimiter=args.delimiter,
        zero_threshold=args.zero_threshold,
        variance_fraction=args.variance_fraction,
        apply_filters=not args.no_filter,
        standardize=not args.no_standardize,
    )


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _cmd_simulate(args) -> int:
    scenario = SCENARIOS[args.scenario]
    config = _config_from(args, scenario=scenario)
    out = _out_dir(args) / f"{scenario.name}_{config.loss}_seed{config.seed}"
    noise_coefs = scenario.p - scenario.s if args.all_coefs else args.noise_coefs
    report = run_scenario(scenario, config, out, n_jobs=args.threads,
                          replications=args.replications,
                          coef_noise_count=noise_coefs)
    table = out / f"summary.{'md' if args.table_style == 'markdown' else args.table_style}"
    report_tables(report, args.table_style, table)
    print(f"records: {out / 'records.jsonl'}")
    print(f"summary: {table}")
    return EXIT_OK


def _cmd_candidates(args) -> int:
    ingest = _ingest_from(args)
    config = _config_from(args)
    cands = build_candidate_set(ingest.dataset, config, n_jobs=args.threads)
    out = _out_dir(args)
    doc = cands.to_json()
    doc["columns"] = [[ingest.columns[i] for i in m] for m in doc["models"]]
    doc["config"] = {"d": config.d, "loss": config.loss, "seed": config.seed,
                     "max_support": config.resolve_max_support(ingest.dataset.n,
                                                               ingest.dataset.p)}
    _write_json(out / "candidates.json", doc)
    print(f"{len(cands)} candidate models -> {out / 'candidates.json'}")
    return EXIT_OK


def _cmd_model_ci(args) -> int:
    ingest = _ingest_from(args)
    config = _config_from(args)
    cands = build_candidate_set(ingest.dataset, config, n_jobs=args.threads)
    kept, reports = model_confidence_set(ingest.dataset, cands, config,
                                         n_jobs=args.threads)
    out = _out_dir(args)
    doc = {
        "alpha": config.alpha,
        "beta_mode": config.beta_mode,
        "candidates": cands.to_json(),
        "kept": [list(m.indices) for m in kept],
        "kept_columns": [[ingest.columns[i] for i in m.indices] for m in kept],
        "reports": [rep.to_json() for rep in reports],
    }
    _write_json(out / "model_ci.json", doc)
    print(f"{len(kept)} of {len(cands)} models kept -> {out / 'model_ci.json'}")
    return EXIT_OK


def _parse_indices(tokens: str, columns: list[str]) -> list[int]:
    out = []
    for tok in tokens.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            out.append(int(tok))
        except ValueError:
            if tok not in columns:
                raise ValidationError(f"unknown coefficient {tok!r}") from None
            out.append(columns.index(tok))
    if not out:
        raise ValidationError("no coefficient indices given")
    return out


def _cmd_coef_ci(args) -> int:
    ingest = _ingest_from(args)
    config = _config_from(args)
    cands = build_candidate_set(ingest.dataset, config, n_jobs=args.threads)
    out = _out_dir(args)
    results = []
    for j in _parse_indices(args.j, ingest.columns):
        union = ci_single_coef(ingest.dataset, cands, j, config.alpha,
                               augmented=args.augmented)
        results.append({"j": j, "column": ingest.columns[j], **union.to_json()})
    doc = {"alpha": config.alpha, "augmented": args.augmented,
           "candidates": cands.to_json(), "intervals": results}
    _write_json(out / "coef_ci.json", doc)
    for row in results:
        print(f"beta[{row['j']}] ({row['column']}): intervals={row['intervals']} "
              f"point-zero={row['contains_point_zero']} measure={row['measure']:.4g}")
    return EXIT_OK


def _load_new_rows(path: str, delimiter: str, ingest: IngestResult) -> np.ndarray:
    p = Path(path)
    if not p.exists():
        raise IOError(f"no such file: {p}")
    import csv as _csv

    with p.open(newline="") as fh:
        reader = _csv.reader(fh, delimiter=delimiter)
        header = [h.strip() for h in next(reader)]
        rows = []
        for row in reader:
            if not row:
                continue
            try:
                rows.append([float(c) for c in row])
            except ValueError:
                raise ValidationError("unparseable cell in new-observation CSV") from None
    if not rows:
        raise ValidationError("new-observation CSV has no rows")
    return ingest.transform_new(np.asarray(rows, dtype=float), header)


def _cmd_case_prob(args) -> int:
    ingest = _ingest_from(args)
    config = _config_from(args)
    cands = build_candidate_set(ingest.dataset, config, n_jobs=args.threads)
    x_new = _load_new_rows(args.x_new, args.delimiter, ingest)
    probs = np.asarray([float(tok) for tok in args.prob.split(",") if tok.strip()])
    if probs.shape[0] != x_new.shape[0]:
        raise ValidationError(
            f"--prob has {probs.shape[0]} entries but x-new has {x_new.shape[0]} rows"
        )
    region = region_case_probs(ingest.dataset, cands, x_new, config.alpha)
    accepted = region.membership(probs)
    doc = {
        "alpha": config.alpha,
        "accepted": bool(accepted),
        "probs": probs.tolist(),
        "diagnostics": region.diagnostics(probs),
        "candidates": cands.to_json(),
    }
    out = _out_dir(args)
    _write_json(out / "case_prob.json", doc)
    print(f"membership: {'accepted' if accepted else 'rejected'} -> {out / 'case_prob.json'}")
    return EXIT_OK


def _cmd_ingest(args) -> int:
    ingest = _ingest_from(args)
    out = _out_dir(args)
    np.savez_compressed(out / "data.npz", x=ingest.dataset.x, y=ingest.dataset.y)
    doc = {
        "n": ingest.dataset.n,
        "p": ingest.dataset.p,
        "label_column": ingest.label_column,
        "columns": ingest.columns,
        "standardized": ingest.scale is not None,
    }
    _write_json(out / "ingest.json", doc)
    print(f"n={ingest.dataset.n} p={ingest.dataset.p} -> {out / 'data.npz'}")
    return EXIT_OK


_DISPATCH = {
    "simulate": _cmd_simulate,
    "candidates": _cmd_candidates,
    "model-ci": _cmd_model_ci,
    "coef-ci": _cmd_coef_ci,
    "case-prob": _cmd_case_prob,
    "ingest": _cmd_ingest,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _DISPATCH[args.command](args)
    except (OSError, IOError) as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
