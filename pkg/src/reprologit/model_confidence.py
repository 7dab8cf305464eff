"""Model confidence sets.

For a candidate model and coefficients, m synthetic response vectors are
drawn from the data-generating map; each is passed through a cardinality-
bounded penalized-path model selector, and the candidate's score is the
Monte-Carlo probability that the selector output on synthetic data is rarer
than the selector output on the observed data.  Candidates scoring below the
confidence target survive.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize as _scipy_minimize

from .core import (
    CandidateSet,
    Dataset,
    InferenceConfig,
    SupportSet,
    ThetaPoint,
    ValidationError,
    validate_dataset,
)
from .sampler import RngStream, draw_logistic, synth_response
from .solvers import DegenerateLabelsError, logistic_lasso_path, mle_logistic, support_at_cardinality

__all__ = [
    "NuclearReport",
    "model_selector_tilde_tau",
    "nuclear_stat",
    "model_confidence_set",
    "NUCLEAR_STREAM_OFFSET",
]

# Stream-id offset for the shared nuclear noise within a replication family.
NUCLEAR_STREAM_OFFSET = 2


@dataclass(frozen=True)
class NuclearReport:
    """Diagnostics for one candidate model's Monte-Carlo score."""

    tau: SupportSet
    t_hat: float
    beta_used: ThetaPoint
    tilde_tau_obs: SupportSet
    frequency_table: dict
    beta_separated: bool = False

    def to_json(self) -> dict:
        return {
            "model": list(self.tau.indices),
            "t_hat": self.t_hat,
            "beta": list(map(float, self.beta_used.coef)),
            "selector_observed": list(self.tilde_tau_obs.indices),
            "frequency_table": [
                {"model": list(supp), "count": int(c)}
                for supp, c in sorted(self.frequency_table.items())
            ],
            "beta_separated": self.beta_separated,
        }


def model_selector_tilde_tau(data_x: np.ndarray, y: np.ndarray, k: int,
                             n_lambda: int = 100) -> SupportSet:
    """Support of the penalized-path point with the largest cardinality not
    exceeding k.  Degenerate labels (all equal) select the empty model."""
    if k < 0:
        raise ValidationError(f"cardinality bound must be >= 0, got {k}")
    if k == 0:
        return SupportSet(())
    try:
        data = validate_dataset(data_x, y)
        path = logistic_lasso_path(data, n_lambda=n_lambda, max_active=k)
    except DegenerateLabelsError:
        return SupportSet(())
    return support_at_cardinality(path, k)


def _draw_noise_matrix(stream: RngStream, m: int, n: int) -> np.ndarray:
    return draw_logistic(stream, m * n).reshape(m, n)


def nuclear_stat_with_noise(
    data: Dataset,
    theta: ThetaPoint,
    noise: np.ndarray,
    tilde_obs: SupportSet | None = None,
) -> NuclearReport:
    """Evaluate the Monte-Carlo score of theta under a fixed noise matrix
    (one row per synthetic draw); noise reuse makes profiling deterministic."""
    m = noise.shape[0]
    k = len(theta.support)
    counts: dict[tuple[int, ...], int] = {}
    draws: list[tuple[int, ...]] = []
    for j in range(m):
        y_star = synth_response(data.x, theta, noise[j])
        supp = model_selector_tilde_tau(data.x, y_star, k)
        draws.append(supp.indices)
        counts[supp.indices] = counts.get(supp.indices, 0) + 1
    if tilde_obs is None:
        tilde_obs = model_selector_tilde_tau(data.x, data.y, k)
    p_obs = counts.get(tilde_obs.indices, 0)
    exceed = sum(1 for key in draws if counts[key] > p_obs)
    return NuclearReport(
        tau=theta.support,
        t_hat=exceed / m,
        beta_used=theta,
        tilde_tau_obs=tilde_obs,
        frequency_table=counts,
    )


def nuclear_stat(data: Dataset, theta: ThetaPoint, m: int, stream: RngStream) -> NuclearReport:
    """Draw m synthetic noise vectors from the stream and score theta."""
    if m < 1:
        raise ValidationError(f"m must be >= 1, got {m}")
    noise = _draw_noise_matrix(stream, m, data.n)
    return nuclear_stat_with_noise(data, theta, noise)


def _profile_theta(data: Dataset, tau: SupportSet, start: np.ndarray,
                   noise: np.ndarray, tilde_obs: SupportSet,
                   max_evals: int = 200):
    """Derivative-free simplex search of the score over the coefficients,
    started at the MLE; the shared noise keeps the objective deterministic."""

    def objective(beta):
        theta = ThetaPoint(support=tau, coef=beta)
        return nuclear_stat_with_noise(data, theta, noise, tilde_obs).t_hat

    res = _scipy_minimize(objective, np.asarray(start, dtype=float),
                          method="Nelder-Mead",
                          options={"maxfev": max_evals, "xatol": 1e-3,
                                   "fatol": 1e-9, "adaptive": True})
    return np.asarray(res.x, dtype=float)


def model_confidence_set(
    data: Dataset,
    cands: CandidateSet,
    config: InferenceConfig,
    n_jobs: int = 1,
    stream_base: int = 0,
) -> tuple[list[SupportSet], list[NuclearReport]]:
    """Score every candidate model and keep those with score below alpha.

    beta_mode 'mle' plugs in the restricted MLE; 'profile' additionally
    minimizes the score over the coefficients with a bounded simplex search.
    The same noise matrix is shared across candidates and profile iterates
    (common random numbers).
    """
    if len(cands) == 0:
        raise ValidationError("candidate set is empty")
    stream = RngStream(seed=config.seed,
                       stream_id=stream_base + NUCLEAR_STREAM_OFFSET)
    noise = _draw_noise_matrix(stream, config.m, data.n)

    obs_cache: dict[int, SupportSet] = {}

    def obs_selector(k: int) -> SupportSet:
        if k not in obs_cache:
            obs_cache[k] = model_selector_tilde_tau(data.x, data.y, k)
        return obs_cache[k]

    for tau in cands:
        obs_selector(len(tau))

    def score(tau: SupportSet) -> NuclearReport:
        fit = mle_logistic(data, tau)
        beta = np.clip(fit.coef, -1e6, 1e6)
        tilde_obs = obs_selector(len(tau))
        if config.beta_mode == "profile" and len(tau) > 0:
            beta = _profile_theta(data, tau, beta, noise, tilde_obs)
        theta = ThetaPoint(support=tau, coef=beta)
        report = nuclear_stat_with_noise(data, theta, noise, tilde_obs)
        if config.beta_mode == "profile" and len(tau) > 0:
            mle_theta = ThetaPoint(support=tau, coef=np.clip(fit.coef, -1e6, 1e6))
            mle_report = nuclear_stat_with_noise(data, mle_theta, noise, tilde_obs)
            if mle_report.t_hat < report.t_hat:
                report = mle_report
        return NuclearReport(
            tau=report.tau,
            t_hat=report.t_hat,
            beta_used=report.beta_used,
            tilde_tau_obs=report.tilde_tau_obs,
            frequency_table=report.frequency_table,
            beta_separated=fit.separated,
        )

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            reports = list(pool.map(score, list(cands)))
    else:
        reports = [score(tau) for tau in cands]

    kept = [rep.tau for rep in reports if rep.t_hat < config.alpha]
    return kept, reports
