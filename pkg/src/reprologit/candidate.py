"""Model candidate sets: for each of d repro noise draws, fit the adaptive
penalized joint (beta, sigma) surrogate along a penalty sweep, pick sweep
points by an extended information criterion, and pool the resulting supports.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .core import CandidateSet, Dataset, InferenceConfig, SupportSet, ValidationError
from .sampler import RngStream, draw_logistic
from .solvers import (
    JointFit,
    adaptive_lambda_max,
    fit_adaptive_joint,
    fit_ridge_joint,
    minimize_sigma_only,
    refit_joint_support,
    zero_one_mismatch,
)
from .stats_util import log_binom

__all__ = ["EbicConfig", "ebic_score", "build_candidate_set", "CANDIDATE_STREAM_BASE"]

# Stream-id offsets reserved for candidate draws within a replication family.
CANDIDATE_STREAM_BASE = 1000


@dataclass(frozen=True)
class EbicConfig:
    """Grid of model-size penalty exponents in [0, 1] for the extended BIC."""

    xi_grid: tuple[float, ...] = (0.0, 0.25, 0.5, 0.75, 1.0)
    n_lambda: int = 30
    lambda_min_ratio: float = 1e-3

    def __post_init__(self):
        if not self.xi_grid:
            raise ValidationError("xi grid must be nonempty")
        if any(not 0.0 <= xi <= 1.0 for xi in self.xi_grid):
            raise ValidationError(f"every xi must lie in [0,1], got {self.xi_grid}")
        if self.n_lambda < 1:
            raise ValidationError("n_lambda must be >= 1")


def ebic_score(data: Dataset, fit: JointFit, eps_star: np.ndarray, xi: float,
               loss: str) -> float:
    """2 * sum_i L((2y_i-1)(x_i'b + sigma eps_i)) + |supp| log n + 2 xi log C(p, |supp|).

    Lower is better.  The log binomial term is computed through log-gamma.
    """
    code = {"logistic": K.LOSS_LOGISTIC, "hinge": K.LOSS_HINGE}[loss]
    margins = data.signs * (data.x @ fit.beta + fit.sigma * np.asarray(eps_star, dtype=float))
    fit_term = 2.0 * float(K.loss_value(np.ascontiguousarray(margins), code, 0.0))
    k = int(np.count_nonzero(fit.beta))
    return fit_term + k * math.log(data.n) + 2.0 * xi * log_binom(data.p, k)


def _one_draw(data: Dataset, config: InferenceConfig, ebic: EbicConfig,
              stream: RngStream, cap: int):
    """Candidate supports from a single repro draw: ridge pilot, adaptive
    penalty sweep (warm-started, decreasing), then per-xi selection by the
    information criterion evaluated at each support's unpenalized refit."""
    eps = draw_logistic(stream, data.n)
    z = data.signs[:, None] * np.column_stack([data.x, eps])
    lip0 = float(np.linalg.norm(z, 2)) ** 2 / 4.0

    pilot = fit_ridge_joint(data, eps, config.loss, lip0=lip0)
    pilot_l1 = float(np.abs(pilot.beta).sum())

    sigma0 = minimize_sigma_only(data, eps, config.loss)
    lam_top = adaptive_lambda_max(data, eps, config.loss, pilot_l1, sigma0=sigma0)
    lams = lam_top * np.logspace(0.0, math.log10(ebic.lambda_min_ratio), ebic.n_lambda)

    warm = np.zeros(data.p + 1)
    warm[data.p] = sigma0
    fits = []
    for lam in lams:
        fit = fit_adaptive_joint(data, eps, config.loss, float(lam), pilot,
                                 theta0=warm, unpenalized=config.unpenalized,
                                 lip0=lip0)
        warm = np.append(fit.beta, fit.sigma)
        fits.append(fit)

    # Only sweep points obeying the cardinality cap are eligible, mirroring
    # the |support| <= k constraint of the underlying estimator; the null
    # model at the top of the sweep is always eligible.  Supports whose
    # unpenalized refit drives the loss to (numerically) zero separate the
    # data: their criterion value is undefined (no interior optimum), so
    # they are skipped unless nothing else remains.
    eligible = [i for i, fit in enumerate(fits) if len(fit.support) <= cap]
    refits: dict[tuple[int, ...], JointFit] = {}
    for i in eligible:
        key = fits[i].support.indices
        if key not in refits:
            # the criterion scores this refit, so shrinkage bias along the
            # sweep does not masquerade as support quality
            refits[key] = refit_joint_support(
                data, eps, config.loss, fits[i].support,
                np.append(fits[i].beta, fits[i].sigma), lip0,
            )

    def _degenerate(fit: JointFit) -> bool:
        if fit.objective < 1e-3:
            return True
        return zero_one_mismatch(data.x, data.y, eps, fit.beta, fit.sigma) == 0

    sound = [i for i in eligible
             if not _degenerate(refits[fits[i].support.indices])]
    if sound:
        eligible = sound
    picks = []
    for xi in ebic.xi_grid:
        scores = [ebic_score(data, refits[fits[i].support.indices], eps, xi,
                             config.loss) for i in eligible]
        best = eligible[int(np.argmin(scores))]
        picks.append((fits[best].support, float(xi), float(lams[best])))
    return picks


def build_candidate_set(
    data: Dataset,
    config: InferenceConfig,
    ebic: EbicConfig | None = None,
    n_jobs: int = 1,
    stream_base: int = 0,
) -> CandidateSet:
    """Pool the per-draw, per-xi selected supports over d repro draws.

    Draws use streams (seed, stream_base + CANDIDATE_STREAM_BASE + j) so the
    result is reproducible and monotone in d.  A draw whose solver fails is
    skipped and counted; only all draws failing is an error.
    """
    if ebic is None:
        ebic = EbicConfig()
    cap = config.resolve_max_support(data.n, data.p)

    def worker(j: int):
        stream = RngStream(seed=config.seed,
                           stream_id=stream_base + CANDIDATE_STREAM_BASE + j)
        return _one_draw(data, config, ebic, stream, cap)

    results: list = [None] * config.d
    failures = 0
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            futures = {j: pool.submit(worker, j) for j in range(config.d)}
            for j, fut in futures.items():
                try:
                    results[j] = fut.result()
                except Exception:
                    results[j] = None
                    failures += 1
    else:
        for j in range(config.d):
            try:
                results[j] = worker(j)
            except Exception:
                failures += 1

    if failures == config.d:
        raise RuntimeError(f"all {config.d} candidate draws failed")

    models: list[SupportSet] = []
    provenance: list[list[dict]] = []
    index: dict[tuple[int, ...], int] = {}
    for j, picks in enumerate(results):
        if picks is None:
            continue
        for supp, xi, lam in picks:
            key = supp.indices
            if key not in index:
                index[key] = len(models)
                models.append(supp)
                provenance.append([])
            provenance[index[key]].append({"draw": j, "xi": xi, "lam": lam})

    return CandidateSet(
        models=tuple(models),
        provenance=tuple(tuple(p) for p in provenance),
        failed_draws=failures,
    )
