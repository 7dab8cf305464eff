"""Compiled inner loops for the penalized solvers.

Everything here operates on plain float64 arrays: the margin convention is
t_i = s_i * (x_i' beta + sigma * eps_i) with s_i = 2 y_i - 1, and losses are
written as functions of the margin.  Loss codes: 0 = logistic, 1 = hinge,
2 = quadratically smoothed hinge (smoothing width passed separately).

All kernels release the GIL so draws and replications can run in thread
pools.
"""

from __future__ import annotations

import numpy as np
from numba import njit

LOSS_LOGISTIC = 0
LOSS_HINGE = 1
LOSS_SMOOTH_HINGE = 2


@njit(cache=True, nogil=True)
def loss_value(t, code, width):
    total = 0.0
    for i in range(t.shape[0]):
        ti = t[i]
        if code == 0:
            if ti > 35.0:
                total += np.exp(-ti)
            elif ti < -35.0:
                total += -ti
            else:
                total += np.log1p(np.exp(-ti))
        elif code == 1:
            if ti < 1.0:
                total += 1.0 - ti
        else:
            s = 1.0 - ti
            if s > 0.0:
                if s < width:
                    total += 0.5 * s * s / width
                else:
                    total += s - 0.5 * width
    return total


@njit(cache=True, nogil=True)
def loss_deriv(t, code, width, out):
    """Derivative of the per-observation loss with respect to the margin."""
    for i in range(t.shape[0]):
        ti = t[i]
        if code == 0:
            if ti > 35.0:
                out[i] = -np.exp(-ti)
            elif ti < -35.0:
                out[i] = -1.0
            else:
                out[i] = -1.0 / (1.0 + np.exp(ti))
        elif code == 1:
            out[i] = -1.0 if ti < 1.0 else 0.0
        else:
            s = 1.0 - ti
            if s <= 0.0:
                out[i] = 0.0
            elif s < width:
                out[i] = -s / width
            else:
                out[i] = -1.0


@njit(cache=True, nogil=True)
def _margins(z, theta, out):
    n, pdim = z.shape
    for i in range(n):
        acc = 0.0
        for j in range(pdim):
            acc += z[i, j] * theta[j]
        out[i] = acc


@njit(cache=True, nogil=True)
def _grad_from_deriv(zt, lp, out):
    pdim, n = zt.shape
    for j in range(pdim):
        acc = 0.0
        for i in range(n):
            acc += zt[j, i] * lp[i]
        out[j] = acc


@njit(cache=True, nogil=True)
def smooth_value_grad(z, zt, theta, code, width):
    n, pdim = z.shape
    t = np.empty(n)
    _margins(z, theta, t)
    val = loss_value(t, code, width)
    lp = np.empty(n)
    loss_deriv(t, code, width, lp)
    grad = np.empty(pdim)
    _grad_from_deriv(zt, lp, grad)
    return val, grad


@njit(cache=True, nogil=True)
def _penalty(theta, lam, pen_w, block_prox, p_block):
    if block_prox:
        acc = 0.0
        for j in range(p_block):
            acc += theta[j] * theta[j]
        return lam * np.sqrt(acc)
    acc = 0.0
    for j in range(theta.shape[0]):
        acc += pen_w[j] * abs(theta[j])
    return lam * acc


@njit(cache=True, nogil=True)
def _prox(v, step_lam, pen_w, block_prox, p_block, out):
    pdim = v.shape[0]
    if block_prox:
        nrm = 0.0
        for j in range(p_block):
            nrm += v[j] * v[j]
        nrm = np.sqrt(nrm)
        factor = 0.0
        if nrm > step_lam:
            factor = 1.0 - step_lam / nrm
        for j in range(pdim):
            if j < p_block:
                out[j] = factor * v[j]
            else:
                out[j] = v[j]
    else:
        for j in range(pdim):
            thr = step_lam * pen_w[j]
            vj = v[j]
            if vj > thr:
                out[j] = vj - thr
            elif vj < -thr:
                out[j] = vj + thr
            else:
                out[j] = 0.0


@njit(cache=True, nogil=True)
def fista_solve(z, zt, code, width, lam, pen_w, block_prox, p_block,
                theta0, max_iter, tol, lip0):
    """Accelerated proximal gradient with backtracking on the smooth part.

    Stops when the relative objective change stays below tol on two
    consecutive iterations, with adaptive restart to keep descent monotone
    in practice.  Margin vectors are carried along affinely so the momentum
    point costs no extra matrix product.  Returns (theta, objective,
    converged, iterations).
    """
    n, pdim = z.shape
    theta = theta0.copy()
    y = theta0.copy()
    t_acc = 1.0
    lip = lip0 if lip0 > 0.0 else 1.0

    m_theta = np.empty(n)   # margins of theta
    m_y = np.empty(n)       # margins of y
    m_cand = np.empty(n)
    lp = np.empty(n)
    grad = np.empty(pdim)
    cand = np.empty(pdim)
    v = np.empty(pdim)

    _margins(z, theta, m_theta)
    for i in range(n):
        m_y[i] = m_theta[i]
    obj = loss_value(m_theta, code, width) + _penalty(theta, lam, pen_w, block_prox, p_block)
    best_theta = theta.copy()
    best_obj = obj

    flat_count = 0
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        fy = loss_value(m_y, code, width)
        loss_deriv(m_y, code, width, lp)
        _grad_from_deriv(zt, lp, grad)

        # backtracking on the quadratic upper bound at y
        while True:
            step = 1.0 / lip
            for j in range(pdim):
                v[j] = y[j] - step * grad[j]
            _prox(v, step * lam, pen_w, block_prox, p_block, cand)
            _margins(z, cand, m_cand)
            f_cand = loss_value(m_cand, code, width)
            quad = fy
            dist2 = 0.0
            for j in range(pdim):
                diff = cand[j] - y[j]
                quad += grad[j] * diff
                dist2 += diff * diff
            quad += 0.5 * lip * dist2
            if f_cand <= quad + 1e-12 * (1.0 + abs(quad)):
                break
            lip *= 2.0
            if lip > 1e18:
                break

        new_obj = f_cand + _penalty(cand, lam, pen_w, block_prox, p_block)
        if new_obj < best_obj:
            best_obj = new_obj
            for j in range(pdim):
                best_theta[j] = cand[j]

        # momentum, with restart when the objective went up
        if new_obj > obj + 1e-12 * (1.0 + abs(obj)):
            t_acc = 1.0
            for j in range(pdim):
                y[j] = cand[j]
            for i in range(n):
                m_y[i] = m_cand[i]
        else:
            t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_acc * t_acc))
            mom = (t_acc - 1.0) / t_next
            for j in range(pdim):
                y[j] = cand[j] + mom * (cand[j] - theta[j])
            for i in range(n):
                m_y[i] = m_cand[i] + mom * (m_cand[i] - m_theta[i])
            t_acc = t_next

        rel_change = abs(obj - new_obj) / max(1.0, abs(obj))
        for j in range(pdim):
            theta[j] = cand[j]
        for i in range(n):
            m_theta[i] = m_cand[i]
        obj = new_obj

        if rel_change < tol:
            flat_count += 1
            if flat_count >= 2:
                converged = True
                break
        else:
            flat_count = 0
        lip *= 0.97  # allow the step size to grow back

    return best_theta, best_obj, converged, it


@njit(cache=True, nogil=True)
def subgradient_phase(z, zt, code, lam, pen_w, block_prox, p_block, theta0, n_iter, eta0):
    """Projected subgradient warm-up for the non-smooth hinge objective.

    Diminishing steps eta0 / sqrt(k); keeps the best iterate seen.
    """
    n, pdim = z.shape
    theta = theta0.copy()
    margins = np.empty(n)
    lp = np.empty(n)
    grad = np.empty(pdim)
    v = np.empty(pdim)
    stepped = np.empty(pdim)

    _margins(z, theta, margins)
    best_obj = loss_value(margins, code, 0.0) + _penalty(theta, lam, pen_w, block_prox, p_block)
    best_theta = theta.copy()

    for k in range(n_iter):
        _margins(z, theta, margins)
        loss_deriv(margins, code, 0.0, lp)
        _grad_from_deriv(zt, lp, grad)
        eta = eta0 / np.sqrt(k + 1.0)
        for j in range(pdim):
            v[j] = theta[j] - eta * grad[j]
        _prox(v, eta * lam, pen_w, block_prox, p_block, stepped)
        for j in range(pdim):
            theta[j] = stepped[j]
        _margins(z, theta, margins)
        obj = loss_value(margins, code, 0.0) + _penalty(theta, lam, pen_w, block_prox, p_block)
        if obj < best_obj:
            best_obj = obj
            for j in range(pdim):
                best_theta[j] = theta[j]
    return best_theta, best_obj


@njit(cache=True, nogil=True)
def logistic_grad_mean(xt, s, margins, out):
    """Gradient of (1/n) sum log(1+exp(-t)) with respect to beta."""
    p, n = xt.shape
    inv_n = 1.0 / n
    lp = np.empty(n)
    loss_deriv(margins, 0, 0.0, lp)
    for j in range(p):
        acc = 0.0
        for i in range(n):
            acc += xt[j, i] * s[i] * lp[i]
        out[j] = acc * inv_n


@njit(cache=True, nogil=True)
def _true_grad_mean(xt, s, margins, grad):
    p, n = xt.shape
    inv_n = 1.0 / n
    for j in range(p):
        acc = 0.0
        for i in range(n):
            ti = margins[i]
            if ti > 35.0:
                dl = -np.exp(-ti)
            elif ti < -35.0:
                dl = -1.0
            else:
                dl = -1.0 / (1.0 + np.exp(ti))
            acc += xt[j, i] * s[i] * dl
        grad[j] = acc * inv_n


@njit(cache=True, nogil=True)
def cd_lasso_path(x, xt, s, w, lambdas, kkt_tol, max_cycles, max_active,
                  stop_after):
    """Proximal-Newton coordinate descent for the L1-penalized mean logistic
    loss along a decreasing lambda grid, warm-started between grid points.

    Each outer cycle builds the local quadratic model (weights mu(1-mu),
    floored for stability), runs coordinate descent on the model over an
    active set, takes the step with halving if the true objective worsens,
    and repeats until the KKT conditions hold at kkt_tol on the true
    gradient.

    max_active > 0 truncates the grid for cardinality-bounded callers: the
    sweep ends once a point with exactly max_active nonzeros has appeared,
    or after stop_after consecutive points above it.  Returns (betas,
    n_valid) where only the first n_valid rows were computed.
    """
    n, p = x.shape
    nl = lambdas.shape[0]
    inv_n = 1.0 / n
    betas = np.zeros((nl, p))
    beta = np.zeros(p)
    margins = np.zeros(n)  # t_i = s_i x_i' beta
    grad = np.empty(p)
    weights = np.empty(n)
    h_diag = np.empty(p)
    delta = np.empty(p)
    u = np.empty(n)  # x @ delta
    active = np.zeros(p, dtype=np.uint8)
    n_valid = nl
    best_card = -1
    excess_run = 0

    for li in range(nl):
        lam = lambdas[li]
        # refresh margins from scratch to kill incremental drift
        for i in range(n):
            acc = 0.0
            for j in range(p):
                if beta[j] != 0.0:
                    acc += x[i, j] * beta[j]
            margins[i] = s[i] * acc

        for _cycle in range(max_cycles):
            _true_grad_mean(xt, s, margins, grad)

            # KKT screen on the true gradient
            worst = 0.0
            for j in range(p):
                if beta[j] != 0.0:
                    viol = abs(grad[j] + lam * w[j] * (1.0 if beta[j] > 0.0 else -1.0))
                    active[j] = 1
                else:
                    excess = abs(grad[j]) - lam * w[j]
                    viol = excess if excess > 0.0 else 0.0
                    active[j] = 1 if viol > 0.1 * kkt_tol else 0
                if viol > worst:
                    worst = viol
            if worst <= kkt_tol:
                break

            # local quadratic model at beta
            for i in range(n):
                ti = margins[i]
                if ti > 35.0 or ti < -35.0:
                    mu1m = 1e-8
                else:
                    e = np.exp(ti)
                    mu1m = e / ((1.0 + e) * (1.0 + e))
                    if mu1m < 1e-8:
                        mu1m = 1e-8
                weights[i] = mu1m * inv_n
            for j in range(p):
                if active[j] == 1:
                    acc = 0.0
                    for i in range(n):
                        acc += weights[i] * x[i, j] * x[i, j]
                    h_diag[j] = acc if acc > 1e-12 else 1e-12
                delta[j] = 0.0
            for i in range(n):
                u[i] = 0.0

            # coordinate descent on the quadratic model
            for _inner in range(200):
                max_move = 0.0
                for j in range(p):
                    if active[j] == 0:
                        continue
                    # model gradient at current delta
                    acc = 0.0
                    for i in range(n):
                        acc += weights[i] * x[i, j] * u[i]
                    mj = grad[j] + acc
                    bj = beta[j] + delta[j]
                    zj = h_diag[j] * bj - mj
                    thr = lam * w[j]
                    if zj > thr:
                        bj_new = (zj - thr) / h_diag[j]
                    elif zj < -thr:
                        bj_new = (zj + thr) / h_diag[j]
                    else:
                        bj_new = 0.0
                    dd = bj_new - bj
                    if dd != 0.0:
                        delta[j] += dd
                        for i in range(n):
                            u[i] += x[i, j] * dd
                        move = abs(dd) * np.sqrt(h_diag[j])
                        if move > max_move:
                            max_move = move
                if max_move < 1e-3 * kkt_tol:
                    break

            # step with halving on the true objective
            f0 = loss_value(margins, 0, 0.0) * inv_n
            pen0 = 0.0
            for j in range(p):
                pen0 += w[j] * abs(beta[j])
            step = 1.0
            accepted = False
            for _half in range(30):
                f1 = 0.0
                for i in range(n):
                    ti = margins[i] + step * s[i] * u[i]
                    if ti > 35.0:
                        f1 += np.exp(-ti)
                    elif ti < -35.0:
                        f1 += -ti
                    else:
                        f1 += np.log1p(np.exp(-ti))
                f1 *= inv_n
                pen1 = 0.0
                for j in range(p):
                    pen1 += w[j] * abs(beta[j] + step * delta[j])
                if f1 + lam * pen1 <= f0 + lam * pen0 + 1e-14:
                    accepted = True
                    break
                step *= 0.5
            if not accepted:
                break  # no further progress possible at this lambda
            for j in range(p):
                if delta[j] != 0.0:
                    beta[j] += step * delta[j]
            for i in range(n):
                margins[i] += step * s[i] * u[i]

        card = 0
        for j in range(p):
            betas[li, j] = beta[j]
            if beta[j] != 0.0:
                card += 1

        if max_active > 0:
            if card <= max_active and card > best_card:
                best_card = card
            if card > max_active:
                excess_run += 1
            else:
                excess_run = 0
            if best_card == max_active or excess_run >= stop_after:
                n_valid = li + 1
                break
    return betas, n_valid
