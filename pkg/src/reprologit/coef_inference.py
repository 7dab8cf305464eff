"""Likelihood-ratio confidence regions for linear combinations of
coefficients, built over a candidate-model collection.

Each candidate model is treated as if true: the combination value t is
accepted under that model when the restricted system is consistent and the
likelihood-ratio statistic falls below the chi-square quantile whose degrees
of freedom equal the rank of the restricted combination matrix.  The region
accepts t when any candidate accepts.  One-dimensional targets additionally
invert the test into an explicit union of intervals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import CandidateSet, Dataset, LinearTarget, SupportSet, ValidationError
from .solvers import IncompatibleTargetError, MleFit, mle_logistic, mle_logistic_constrained
from .stats_util import IntervalUnion, chi2_quantile, merge_intervals, numerical_rank

__all__ = [
    "RegionHandle",
    "CaseProbRegion",
    "lrt_stat",
    "region_abeta",
    "ci_single_coef",
    "region_case_probs",
    "chi2_quantile",
    "IntervalUnion",
]

_RANK_TOL_SCALE = 1e-10
_ENDPOINT_STAT_TOL = 1e-4
_BRACKET_WIDTH_CAP = 1e3


def _capped_loglik(fit: MleFit) -> float:
    """A separated unrestricted fit acts as a perfect fit (log-likelihood 0)."""
    return 0.0 if fit.separated else fit.loglik


def _stat_against(data: Dataset, tau: SupportSet, a_restricted: np.ndarray,
                  t: np.ndarray, loglik1: float) -> float:
    """-2 (constrained loglik - unconstrained loglik); +inf on inconsistency
    or a separated constrained fit (rejection-safe)."""
    try:
        fit0 = mle_logistic_constrained(data, tau, a_restricted, t)
    except IncompatibleTargetError:
        return math.inf
    if fit0.separated:
        return math.inf
    return -2.0 * (fit0.loglik - loglik1)


def lrt_stat(data: Dataset, tau: SupportSet, a: LinearTarget, t: np.ndarray) -> float:
    """Likelihood-ratio statistic for testing a_restricted(tau) b = t under
    the model tau."""
    t = np.asarray(t, dtype=float).ravel()
    if t.shape[0] != a.q:
        raise ValidationError(f"target length {t.shape[0]} does not match q={a.q}")
    fit1 = mle_logistic(data, tau)
    return _stat_against(data, tau, a.restricted(tau), t, _capped_loglik(fit1))


@dataclass
class _CandidateTest:
    """Per-candidate cached pieces of the region membership test."""

    tau: SupportSet
    a_restricted: np.ndarray
    rank: int
    quantile: float  # 0.0 when rank == 0 (acceptance rides on consistency)
    loglik1: float
    separated1: bool

    def stat(self, data: Dataset, t: np.ndarray) -> float:
        return _stat_against(data, self.tau, self.a_restricted, t, self.loglik1)


def _prepare_tests(data: Dataset, cands: CandidateSet, a: LinearTarget,
                   alpha: float) -> list[_CandidateTest]:
    quantile_cache: dict[int, float] = {}
    tests = []
    for tau in cands:
        a_r = a.restricted(tau)
        r = numerical_rank(a_r, _RANK_TOL_SCALE)
        if r not in quantile_cache:
            quantile_cache[r] = chi2_quantile(r, alpha) if r >= 1 else 0.0
        fit1 = mle_logistic(data, tau)
        tests.append(
            _CandidateTest(tau=tau, a_restricted=a_r, rank=r,
                           quantile=quantile_cache[r],
                           loglik1=_capped_loglik(fit1),
                           separated1=fit1.separated)
        )
    return tests


@dataclass
class RegionHandle:
    """A confidence region for a linear combination, exposed as a membership
    predicate over target vectors t with per-candidate diagnostics."""

    data: Dataset
    candidates: CandidateSet
    alpha: float
    target: LinearTarget
    tests: list[_CandidateTest] = field(default_factory=list)

    def membership(self, t) -> bool:
        t = np.asarray(t, dtype=float).ravel()
        for test in self.tests:
            if self._accepts(test, t):
                return True
        return False

    def diagnostics(self, t) -> list[dict]:
        t = np.asarray(t, dtype=float).ravel()
        rows = []
        for test in self.tests:
            stat = test.stat(self.data, t)
            if test.rank == 0:
                accepted = math.isfinite(stat)
            else:
                accepted = stat < test.quantile
            rows.append({
                "model": list(test.tau.indices),
                "rank": test.rank,
                "stat": stat,
                "quantile": test.quantile,
                "accepted": accepted,
                "alternative_separated": test.separated1,
            })
        return rows

    def _accepts(self, test: _CandidateTest, t: np.ndarray) -> bool:
        stat = test.stat(self.data, t)
        if test.rank == 0:
            # a zero-rank restriction carries no degrees of freedom: the
            # decision is consistency of the linear system alone
            return math.isfinite(stat)
        return stat < test.quantile


def region_abeta(data: Dataset, cands: CandidateSet, a: LinearTarget,
                 alpha: float) -> RegionHandle:
    """Region for the q linear combinations given by the target matrix."""
    if len(cands) == 0:
        raise ValidationError("candidate set is empty")
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must be in (0,1), got {alpha}")
    return RegionHandle(data=data, candidates=cands, alpha=alpha, target=a,
                        tests=_prepare_tests(data, cands, a, alpha))


def _invert_scalar_stat(stat_fn, t0: float, threshold: float, h0: float) -> tuple[float, float]:
    """Endpoints of {t : stat(t) < threshold} around t0 for a profile
    statistic that is quasiconvex around its minimizer.

    Expands a bracket by doubling until rejection or half-width 1e3, then
    bisects to |stat - threshold| <= 1e-4 on the statistic scale.
    """
    def one_side(direction: float) -> float:
        h = h0
        prev = 0.0
        while h < _BRACKET_WIDTH_CAP:
            if stat_fn(t0 + direction * h) >= threshold:
                break
            prev = h
            h *= 2.0
        else:
            return t0 + direction * _BRACKET_WIDTH_CAP
        lo, hi = prev, min(h, _BRACKET_WIDTH_CAP)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            s = stat_fn(t0 + direction * mid)
            if abs(s - threshold) <= _ENDPOINT_STAT_TOL:
                return t0 + direction * mid
            if s < threshold:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-13 * max(1.0, abs(t0)):
                break
        return t0 + direction * 0.5 * (lo + hi)

    return one_side(-1.0), one_side(1.0)


def ci_single_coef(data: Dataset, cands: CandidateSet, j: int, alpha: float,
                   augmented: bool = False) -> IntervalUnion:
    """Union-of-intervals confidence set for one coefficient.

    Candidates not containing the coordinate contribute the singleton {0}
    (they assert the coefficient is exactly zero); in augmented mode the
    coordinate is first adjoined to every candidate model.
    """
    if len(cands) == 0:
        raise ValidationError("candidate set is empty")
    if not 0 <= j < data.p:
        raise ValidationError(f"coefficient index {j} out of range for p={data.p}")
    threshold = chi2_quantile(1, alpha)
    intervals: list[tuple[float, float]] = []
    point_zero = False

    for tau in cands:
        tau_eff = tau.with_index(j) if augmented else tau
        if j not in tau_eff:
            point_zero = True
            continue
        fit1 = mle_logistic(data, tau_eff)
        loglik1 = _capped_loglik(fit1)
        jj = tau_eff.indices.index(j)
        pin = np.zeros((1, len(tau_eff)))
        pin[0, jj] = 1.0

        def stat_fn(t: float) -> float:
            return _stat_against(data, tau_eff, pin, np.array([t]), loglik1)

        t0 = float(fit1.coef[jj])
        if not stat_fn(t0) < threshold:
            continue  # no acceptance region around the centre for this model
        try:
            var = float(np.linalg.pinv(fit1.hessian)[jj, jj])
        except np.linalg.LinAlgError:
            var = 0.0
        h0 = math.sqrt(var) if var > 0 and math.isfinite(var) else 0.5
        lo, hi = _invert_scalar_stat(stat_fn, t0, threshold, h0)
        intervals.append((lo, hi))

    return merge_intervals(intervals, contains_point_zero=point_zero)


@dataclass
class CaseProbRegion:
    """Simultaneous region for the success probabilities of new observations;
    membership of a probability vector is tested on the log-odds scale."""

    linear_region: RegionHandle
    x_new: np.ndarray

    @property
    def n_new(self) -> int:
        return self.x_new.shape[0]

    def membership(self, probs) -> bool:
        return self.linear_region.membership(self._logit(probs))

    def diagnostics(self, probs) -> list[dict]:
        return self.linear_region.diagnostics(self._logit(probs))

    def membership_logits(self, t) -> bool:
        return self.linear_region.membership(t)

    def _logit(self, probs) -> np.ndarray:
        probs = np.asarray(probs, dtype=float).ravel()
        if probs.shape[0] != self.n_new:
            raise ValidationError(
                f"probability vector length {probs.shape[0]} does not match n_new={self.n_new}"
            )
        if np.any(probs <= 0.0) or np.any(probs >= 1.0):
            raise ValidationError("invalid probability: entries must lie in (0, 1)")
        return np.log(probs) - np.log1p(-probs)


def region_case_probs(data: Dataset, cands: CandidateSet, x_new: np.ndarray,
                      alpha: float) -> CaseProbRegion:
    """Region for the vector of success probabilities at new covariate rows;
    the linear target matrix is the new design itself."""
    x_new = np.asarray(x_new, dtype=float)
    if x_new.ndim == 1:
        x_new = x_new.reshape(1, -1)
    if x_new.shape[1] != data.p:
        raise ValidationError(
            f"new design has {x_new.shape[1]} columns, expected p={data.p}"
        )
    region = region_abeta(data, cands, LinearTarget(a=x_new), alpha)
    return CaseProbRegion(linear_region=region, x_new=x_new)
