"""Continuous optimization: L1-penalized logistic regression paths, adaptive
penalized joint (beta, sigma) fits under logistic or hinge loss, ridge-norm
pilot fits with cross-validated tuning, and low-dimensional (optionally
linearly constrained) logistic maximum likelihood.

All solvers are pure functions of their inputs and safe to call from many
threads at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .core import Dataset, SupportSet, ValidationError
from .stats_util import numerical_rank

__all__ = [
    "DegenerateLabelsError",
    "DegeneratePilotError",
    "IncompatibleTargetError",
    "LassoPath",
    "JointFit",
    "MleFit",
    "logistic_lasso_path",
    "support_at_cardinality",
    "fit_adaptive_joint",
    "fit_ridge_joint",
    "mle_logistic",
    "mle_logistic_constrained",
    "joint_objective",
    "joint_loss_grad",
    "zero_one_mismatch",
    "minimize_sigma_only",
    "adaptive_lambda_max",
]

_LOSS_CODE = {"logistic": K.LOSS_LOGISTIC, "hinge": K.LOSS_HINGE}
_HINGE_SMOOTH_WIDTH = 1e-4
_NEWTON_TOL = 1e-8
_NEWTON_MAX_ITER = 100
_NEWTON_NORM_CAP = 1e3
_NEWTON_JITTER = 1e-8


class DegenerateLabelsError(ValueError):
    """All labels share one value, so the penalized path is undefined."""


class DegeneratePilotError(ValueError):
    """The pilot estimate has zero L1 norm, so the adaptive penalty blows up."""


class IncompatibleTargetError(ValueError):
    """The restricted linear system A_tau b = t has no solution."""


def _check_loss(loss: str) -> int:
    if loss not in _LOSS_CODE:
        raise ValidationError(f"loss must be 'logistic' or 'hinge', got {loss!r}")
    return _LOSS_CODE[loss]


def _signed_augmented(data: Dataset, eps_star: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    eps_star = np.asarray(eps_star, dtype=float)
    if eps_star.shape != (data.n,):
        raise ValidationError(
            f"noise length {eps_star.shape} does not match sample size {data.n}"
        )
    z = data.signs[:, None] * np.column_stack([data.x, eps_star])
    return np.ascontiguousarray(z), np.ascontiguousarray(z.T)


def _top_singular_sq(z: np.ndarray) -> float:
    return float(np.linalg.norm(z, 2)) ** 2


@dataclass(frozen=True)
class LassoPath:
    """Solutions of the L1-penalized mean logistic loss along a decreasing
    lambda grid (betas has one row per grid point)."""

    lambdas: np.ndarray
    betas: np.ndarray
    supports: tuple[SupportSet, ...]

    def __len__(self) -> int:
        return self.lambdas.shape[0]


@dataclass(frozen=True)
class JointFit:
    """A penalized joint (beta, sigma) fit; beta carries explicit zeros."""

    beta: np.ndarray
    sigma: float
    objective: float
    converged: bool
    lam: float = math.nan

    @property
    def support(self) -> SupportSet:
        return SupportSet.from_iterable(np.flatnonzero(self.beta))


@dataclass(frozen=True)
class MleFit:
    """Restricted-model logistic MLE; hessian is the negative curvature of
    the log-likelihood at the optimum (X' W X on the restricted design)."""

    coef: np.ndarray
    loglik: float
    hessian: np.ndarray
    separated: bool


def logistic_lasso_path(
    data: Dataset,
    weights: np.ndarray | None = None,
    n_lambda: int = 100,
    lambda_min_ratio: float = 1e-3,
    kkt_tol: float = 1e-7,
    max_cycles: int = 200,
    max_active: int | None = None,
) -> LassoPath:
    """Coordinate-descent path for (1/n) sum log(1+exp(-(2y-1) x'b)) + lam * sum w_j |b_j|.

    The grid runs from lambda_max (smallest lambda with an all-zero solution,
    computed from the gradient at zero and the penalty weights) down to
    lambda_max * lambda_min_ratio, log-spaced, with warm starts.  max_active
    stops the sweep early for cardinality-bounded callers, once a point with
    exactly that many nonzeros appears or the support has exceeded it for
    several consecutive grid points.
    """
    if n_lambda < 2:
        raise ValidationError(f"n_lambda must be >= 2, got {n_lambda}")
    y_sum = int(data.y.sum())
    if y_sum == 0 or y_sum == data.n:
        raise DegenerateLabelsError("degenerate labels: all responses share one value")
    p = data.p
    if weights is None:
        w = np.ones(p)
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != (p,) or np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValidationError("penalty weights must be a nonnegative length-p vector")
        if not np.any(w > 0):
            raise ValidationError("at least one coefficient must be penalized")

    s = data.signs
    grad0 = -(data.x.T @ s) / (2.0 * data.n)
    penalized = w > 0
    lam_max = float(np.max(np.abs(grad0[penalized]) / w[penalized]))
    if lam_max <= 0.0:
        raise DegenerateLabelsError("degenerate labels: zero gradient at the null model")
    lam_max *= 1.0 + 1e-10
    grid = lam_max * np.logspace(0.0, math.log10(lambda_min_ratio), n_lambda)

    x = np.ascontiguousarray(data.x)
    xt = np.ascontiguousarray(data.x.T)
    betas, n_valid = K.cd_lasso_path(
        x, xt, np.ascontiguousarray(s), w, grid, kkt_tol, max_cycles,
        0 if max_active is None else int(max_active), 5,
    )
    betas = betas[:n_valid]
    supports = tuple(SupportSet.from_iterable(np.flatnonzero(b)) for b in betas)
    return LassoPath(lambdas=grid[:n_valid], betas=betas, supports=supports)


def support_at_cardinality(path: LassoPath, k: int) -> SupportSet:
    """Largest-cardinality support along the path not exceeding k; ties in
    cardinality resolve to the larger (more regularized) lambda."""
    if len(path) == 0:
        raise ValidationError("empty path")
    if k < 0:
        raise ValidationError(f"cardinality bound must be >= 0, got {k}")
    best = SupportSet(())
    best_card = -1
    for supp in path.supports:  # lambdas are decreasing, so first win = largest lambda
        c = len(supp)
        if best_card < c <= k:
            best, best_card = supp, c
    return best


def joint_objective(
    x, y, eps_star, beta, sigma, loss: str, lam: float = 0.0, pilot_l1: float = 1.0
) -> float:
    """sum_i L((2y_i-1)(x_i'beta + sigma eps_i)) + lam * ||beta||_1 / pilot_l1."""
    code = _check_loss(loss)
    s = 2.0 * np.asarray(y, dtype=float) - 1.0
    t = s * (np.asarray(x, dtype=float) @ np.asarray(beta, dtype=float) + sigma * np.asarray(eps_star, dtype=float))
    return float(K.loss_value(np.ascontiguousarray(t), code, 0.0)
                 + lam * np.abs(beta).sum() / pilot_l1)


def joint_loss_grad(x, y, eps_star, beta, sigma, loss: str):
    """Value and gradient of the smooth part sum_i L(margin_i) in (beta, sigma)."""
    code = _check_loss(loss)
    if loss == "hinge":
        code = K.LOSS_SMOOTH_HINGE
    width = _HINGE_SMOOTH_WIDTH if loss == "hinge" else 0.0
    x = np.asarray(x, dtype=float)
    s = 2.0 * np.asarray(y, dtype=float) - 1.0
    z = s[:, None] * np.column_stack([x, np.asarray(eps_star, dtype=float)])
    theta = np.append(np.asarray(beta, dtype=float), float(sigma))
    val, grad = K.smooth_value_grad(
        np.ascontiguousarray(z), np.ascontiguousarray(z.T), theta, code, width
    )
    return float(val), grad[:-1].copy(), float(grad[-1])


def zero_one_mismatch(x, y, eps_star, beta, sigma) -> int:
    """Count of observations where 1{x'beta + sigma eps > 0} differs from y."""
    pred = (np.asarray(x, dtype=float) @ np.asarray(beta, dtype=float)
            + sigma * np.asarray(eps_star, dtype=float)) > 0.0
    return int(np.sum(pred.astype(int) != np.asarray(y)))


def minimize_sigma_only(data: Dataset, eps_star: np.ndarray, loss: str,
                        bracket: float = 64.0) -> float:
    """argmin over sigma alone of sum_i L((2y_i-1) sigma eps_i), by golden
    section (the objective is convex in sigma)."""
    code = _check_loss(loss)
    u = np.ascontiguousarray(data.signs * np.asarray(eps_star, dtype=float))

    def f(sig: float) -> float:
        return float(K.loss_value(np.ascontiguousarray(sig * u), code, 0.0))

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = -bracket, bracket
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(120):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
        if b - a < 1e-12 * bracket:
            break
    return 0.5 * (a + b)


def adaptive_lambda_max(data: Dataset, eps_star: np.ndarray, loss: str,
                        pilot_l1: float, sigma0: float | None = None) -> float:
    """Smallest penalty that zeroes beta in the adaptive joint objective:
    pilot_l1 * max_j |d/d beta_j sum_i L(margins)| at (beta=0, sigma0)."""
    if sigma0 is None:
        sigma0 = minimize_sigma_only(data, eps_star, loss)
    _, gb, _ = joint_loss_grad(data.x, data.y, eps_star, np.zeros(data.p), sigma0, loss)
    return float(pilot_l1 * np.max(np.abs(gb))) * (1.0 + 1e-10)


def _run_fista(z, zt, code, width, lam, pen_w, block_prox, theta0,
               max_iter, tol, lip0):
    p_block = z.shape[1] - 1
    theta, obj, conv, _ = K.fista_solve(
        z, zt, code, width, lam, pen_w, bool(block_prox), p_block,
        np.ascontiguousarray(theta0, dtype=float), max_iter, tol, lip0,
    )
    return theta, obj, bool(conv)


# Smoothing homotopy for the hinge polish: coarse widths first, the
# spec width last, each stage warm-starting the next.
_HINGE_WIDTHS = (1e-1, 1e-2, 1e-3, _HINGE_SMOOTH_WIDTH)


def _hinge_solve(z, zt, lam, pen_w, block_prox, theta0, max_iter, tol, lip0,
                 cold: bool = True):
    """Diminishing-step subgradient warm-up, then smoothed-hinge polish with
    a decreasing sequence of smoothing widths ending at 1e-4.

    A caller-provided warm start (a neighbouring penalty's solution) skips
    the warm-up and the coarse smoothing stages.
    """
    p = z.shape[1] - 1
    warm = np.ascontiguousarray(theta0, dtype=float)
    if cold:
        eta0 = 2.0 / math.sqrt(max(lip0, 1e-12))
        warm, _ = K.subgradient_phase(z, zt, K.LOSS_HINGE, lam, pen_w,
                                      bool(block_prox), p, warm, 150, eta0)
    conv = False
    for width in _HINGE_WIDTHS:
        stage_iter = 150 if width != _HINGE_SMOOTH_WIDTH else max_iter
        warm, _, conv = _run_fista(z, zt, K.LOSS_SMOOTH_HINGE, width, lam,
                                   pen_w, block_prox, warm, stage_iter, tol, lip0)
    return warm, conv


def fit_adaptive_joint(
    data: Dataset,
    eps_star: np.ndarray,
    loss: str,
    lam: float,
    pilot: JointFit,
    theta0: np.ndarray | None = None,
    unpenalized: tuple[int, ...] = (),
    lip0: float | None = None,
    max_iter: int = 10_000,
    tol: float = 1e-8,
) -> JointFit:
    """Minimize sum_i L((2y_i-1)(x_i'b + sigma eps_i)) + lam ||b||_1 / ||pilot||_1
    jointly over (b, sigma); sigma is unpenalized and unconstrained.

    Proximal gradient with Nesterov acceleration and backtracking; the hinge
    loss runs a diminishing-step subgradient warm-up and then polishes on a
    quadratically smoothed hinge (width 1e-4).
    """
    code = _check_loss(loss)
    pilot_l1 = float(np.abs(pilot.beta).sum())
    if pilot_l1 <= 0.0:
        raise DegeneratePilotError("degenerate pilot: zero L1 norm")
    z, zt = _signed_augmented(data, eps_star)
    p = data.p
    pen_w = np.ones(p + 1)
    pen_w[p] = 0.0
    for j in unpenalized:
        pen_w[int(j)] = 0.0
    lam_eff = lam / pilot_l1
    cold = theta0 is None
    if theta0 is None:
        theta0 = np.zeros(p + 1)
        theta0[p] = 1.0
    if lip0 is None:
        lip0 = _top_singular_sq(z) / 4.0

    if code == K.LOSS_LOGISTIC:
        theta, obj, conv = _run_fista(z, zt, code, 0.0, lam_eff, pen_w, False,
                                      theta0, max_iter, tol, lip0)
    else:
        theta, conv = _hinge_solve(z, zt, lam_eff, pen_w, False, theta0,
                                   max_iter, tol, lip0, cold=cold)
        margins = z @ theta
        obj = float(K.loss_value(np.ascontiguousarray(margins), K.LOSS_HINGE, 0.0)
                    + lam_eff * (pen_w[:p] * np.abs(theta[:p])).sum())

    return JointFit(beta=theta[:p].copy(), sigma=float(theta[p]),
                    objective=float(obj), converged=conv, lam=float(lam))


def fit_ridge_joint(
    data: Dataset,
    eps_star: np.ndarray,
    loss: str,
    lambdas: np.ndarray | None = None,
    n_lambda: int = 10,
    n_folds: int = 3,
    max_iter: int = 10_000,
    tol: float = 1e-8,
    lip0: float | None = None,
) -> JointFit:
    """Minimize sum_i L(margins) + lam ||b||_2 (norm, not squared) over
    (b, sigma), with lam selected from a log grid by k-fold cross validation
    on held-out mean loss, then refit on the full data.

    The fold partition is the deterministic striding i mod n_folds.
    """
    if data.n < n_folds:
        raise ValidationError(f"need n >= {n_folds} for {n_folds}-fold selection")
    code = _check_loss(loss)
    z, zt = _signed_augmented(data, eps_star)
    p = data.p
    pen_w = np.zeros(p + 1)  # unused by the block prox, kept for signature parity
    if lip0 is None:
        lip0 = _top_singular_sq(z) / 4.0

    sigma0 = minimize_sigma_only(data, eps_star, loss)
    theta_init = np.zeros(p + 1)
    theta_init[p] = sigma0

    if lambdas is None:
        _, gb, _ = joint_loss_grad(data.x, data.y, eps_star, np.zeros(p), sigma0, loss)
        lam_top = float(np.linalg.norm(gb)) * (1.0 + 1e-10)
        lam_top = max(lam_top, 1e-12)
        lambdas = lam_top * np.logspace(0.0, -3.0, n_lambda)
    lambdas = np.asarray(lambdas, dtype=float)
    order = np.argsort(lambdas)[::-1]
    lambdas = lambdas[order]

    def _one_fit(zf, ztf, lam, warm, cold=False):
        if code == K.LOSS_LOGISTIC:
            return _run_fista(zf, ztf, code, 0.0, lam, pen_w, True, warm,
                              max_iter, tol, lip0)
        theta, conv = _hinge_solve(zf, ztf, lam, pen_w, True, warm,
                                   max_iter, tol, lip0, cold=cold)
        obj = float(K.loss_value(np.ascontiguousarray(zf @ theta), K.LOSS_HINGE, 0.0)
                    + lam * np.linalg.norm(theta[:p]))
        return theta, obj, conv

    scores = np.zeros(lambdas.shape[0])
    if lambdas.shape[0] > 1:
        fold_id = np.arange(data.n) % n_folds
        for f in range(n_folds):
            train = fold_id != f
            val = ~train
            z_tr = np.ascontiguousarray(z[train])
            zt_tr = np.ascontiguousarray(z_tr.T)
            z_val = np.ascontiguousarray(z[val])
            warm = theta_init
            for li, lam in enumerate(lambdas):
                theta, _, _ = _one_fit(z_tr, zt_tr, lam, warm, cold=(li == 0))
                warm = theta
                held = K.loss_value(np.ascontiguousarray(z_val @ theta),
                                    code, 0.0) / z_val.shape[0]
                scores[li] += held
    best = int(np.argmin(scores))
    lam_star = float(lambdas[best])

    theta, obj, conv = _one_fit(z, zt, lam_star, theta_init, cold=True)
    if code != K.LOSS_LOGISTIC:
        obj = float(K.loss_value(np.ascontiguousarray(z @ theta), K.LOSS_HINGE, 0.0)
                    + lam_star * np.linalg.norm(theta[:p]))
    return JointFit(beta=theta[:p].copy(), sigma=float(theta[p]),
                    objective=float(obj), converged=conv, lam=lam_star)


def refit_joint_support(
    data: Dataset,
    eps_star: np.ndarray,
    loss: str,
    support: SupportSet,
    warm_dense: np.ndarray | None = None,
    lip0: float | None = None,
    max_iter: int = 2000,
    tol: float = 1e-8,
) -> JointFit:
    """Unpenalized joint (beta, sigma) fit restricted to a support, with the
    coefficients embedded back into a dense length-p vector.

    Near-separable restricted problems simply run to the iteration cap; the
    objective is what the caller needs and it is capped-monotone.
    """
    code = _check_loss(loss)
    idx = support.as_array()
    eps_star = np.asarray(eps_star, dtype=float)
    xs = data.x[:, idx] if idx.size else np.zeros((data.n, 0))
    z = data.signs[:, None] * np.column_stack([xs, eps_star])
    z = np.ascontiguousarray(z)
    zt = np.ascontiguousarray(z.T)
    k = idx.size
    pen_w = np.zeros(k + 1)
    if warm_dense is not None:
        theta0 = np.append(warm_dense[:-1][idx] if k else np.zeros(0), warm_dense[-1])
    else:
        theta0 = np.zeros(k + 1)
    if lip0 is None:
        lip0 = _top_singular_sq(z) / 4.0
    if code == K.LOSS_LOGISTIC:
        theta, obj, conv = _run_fista(z, zt, code, 0.0, 0.0, pen_w, False,
                                      theta0, max_iter, tol, lip0)
    else:
        theta, conv = _hinge_solve(z, zt, 0.0, pen_w, False, theta0,
                                   max_iter, tol, lip0, cold=False)
        obj = float(K.loss_value(np.ascontiguousarray(z @ theta), K.LOSS_HINGE, 0.0))
    beta = np.zeros(data.p)
    if k:
        beta[idx] = theta[:k]
    return JointFit(beta=beta, sigma=float(theta[k]), objective=float(obj),
                    converged=conv, lam=0.0)


def _loglik(xs: np.ndarray, s: np.ndarray, b: np.ndarray, offset: np.ndarray | None) -> float:
    t = s * (xs @ b + (offset if offset is not None else 0.0))
    return -float(K.loss_value(np.ascontiguousarray(t), K.LOSS_LOGISTIC, 0.0))


def _newton_logistic(xs: np.ndarray, y: np.ndarray, offset: np.ndarray | None):
    """Newton-Raphson with step halving and a small ridge jitter on the
    Hessian.  Returns (b, loglik, hessian, separated)."""
    n, k = xs.shape
    s = 2.0 * y - 1.0
    if k == 0:
        ll = _loglik(xs, s, np.zeros(0), offset)
        return np.zeros(0), ll, np.zeros((0, 0)), False

    b = np.zeros(k)
    ll = _loglik(xs, s, b, offset)
    separated = True  # flipped to False on gradient convergence
    for _ in range(_NEWTON_MAX_ITER):
        eta = xs @ b + (offset if offset is not None else 0.0)
        mu = 1.0 / (1.0 + np.exp(-np.clip(eta, -700, 700)))
        grad = xs.T @ (y - mu)
        if np.max(np.abs(grad), initial=0.0) < _NEWTON_TOL:
            separated = False
            break
        w = mu * (1.0 - mu)
        hess = xs.T @ (w[:, None] * xs) + _NEWTON_JITTER * np.eye(k)
        try:
            delta = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            delta = np.linalg.lstsq(hess, grad, rcond=None)[0]
        step = 1.0
        for _half in range(30):
            b_try = b + step * delta
            ll_try = _loglik(xs, s, b_try, offset)
            if ll_try >= ll - 1e-12:
                b, ll = b_try, ll_try
                break
            step *= 0.5
        else:
            b = b + step * delta
            ll = _loglik(xs, s, b, offset)
        if np.linalg.norm(b) > _NEWTON_NORM_CAP:
            separated = True
            break

    eta = xs @ b + (offset if offset is not None else 0.0)
    mu = 1.0 / (1.0 + np.exp(-np.clip(eta, -700, 700)))
    w = mu * (1.0 - mu)
    hess = xs.T @ (w[:, None] * xs)
    ll = _loglik(xs, s, b, offset)
    if ll > -1e-6:
        # numerically perfect fit: the likelihood has no interior optimum
        separated = True
    return b, ll, hess, separated


def mle_logistic(data: Dataset, support: SupportSet,
                 offset: np.ndarray | None = None) -> MleFit:
    """Logistic MLE on the design restricted to a support.

    The empty support returns log-likelihood -n log 2 (probability 1/2 per
    observation).  Separation is reported as a flag, not an exception.
    """
    k = len(support)
    if k > data.n:
        raise ValidationError(f"support cardinality {k} exceeds sample size {data.n}")
    idx = support.as_array()
    if idx.size and idx.max() >= data.p:
        raise ValidationError(f"support index {idx.max()} out of range for p={data.p}")
    xs = data.x[:, idx] if k else np.zeros((data.n, 0))
    b, ll, hess, separated = _newton_logistic(xs, data.y.astype(float), offset)
    return MleFit(coef=b, loglik=ll, hessian=hess, separated=separated)


def mle_logistic_constrained(
    data: Dataset,
    support: SupportSet,
    a_restricted: np.ndarray,
    t: np.ndarray,
) -> MleFit:
    """Logistic MLE on a support subject to A_restricted b = t.

    Reparameterizes b = b_particular + N' v with the rows of N an orthonormal
    null-space basis of A_restricted (from SVD) and runs Newton in v.  Raises
    IncompatibleTargetError when the constraint system is inconsistent.
    """
    k = len(support)
    a = np.asarray(a_restricted, dtype=float)
    if a.ndim == 1:
        a = a.reshape(1, -1)
    t = np.asarray(t, dtype=float).ravel()
    if a.shape != (t.shape[0], k):
        raise ValidationError(
            f"constraint shapes disagree: A is {a.shape}, t has length {t.shape[0]}, |support|={k}"
        )
    tol_t = 1e-8 * (1.0 + float(np.linalg.norm(t)))

    if a.shape[0] == 0:
        return mle_logistic(data, support)
    if k == 0:
        if float(np.linalg.norm(t)) > tol_t:
            raise IncompatibleTargetError("incompatible target: no free coefficients")
        return mle_logistic(data, support)

    u, sv, vt = np.linalg.svd(a, full_matrices=True)
    r = numerical_rank(a)
    if r > 0:
        b_part = vt[:r].T @ ((u[:, :r].T @ t) / sv[:r])
    else:
        b_part = np.zeros(k)
    if float(np.linalg.norm(a @ b_part - t)) > tol_t:
        raise IncompatibleTargetError("incompatible target: inconsistent linear system")

    idx = support.as_array()
    xs = data.x[:, idx]
    null_basis = vt[r:]  # rows orthonormal, shape (k - r, k)
    if null_basis.shape[0] == 0:
        # fully pinned: evaluate at the particular solution
        s = data.signs
        eta = xs @ b_part
        mu = 1.0 / (1.0 + np.exp(-np.clip(eta, -700, 700)))
        w = mu * (1.0 - mu)
        hess = xs.T @ (w[:, None] * xs)
        return MleFit(coef=b_part, loglik=_loglik(xs, s, b_part, None),
                      hessian=hess, separated=False)

    design = xs @ null_basis.T
    offset = xs @ b_part
    v, ll, _, separated = _newton_logistic(design, data.y.astype(float), offset)
    coef = b_part + null_basis.T @ v
    eta = xs @ coef
    mu = 1.0 / (1.0 + np.exp(-np.clip(eta, -700, 700)))
    w = mu * (1.0 - mu)
    hess = xs.T @ (w[:, None] * xs)
    return MleFit(coef=coef, loglik=ll, hessian=hess, separated=separated)
