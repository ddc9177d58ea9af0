"""Worst-case expected cost over a relative-entropy ball.

The maximization of the mean over pmfs within KL distance ``r`` of an
empirical pmf reduces to a one-dimensional convex problem in a scalar
``beta`` bounded below by the top support point.  This module provides the
scalar objective, a derivative-free solver with a KKT-based reconstruction
of the maximizing pmf, and an independent simplex grid-search oracle used
to verify strong duality in tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .marginals import Marginal

__all__ = ["DualSolution", "dual_objective", "minimize_dual", "solve_dual", "primal_oracle"]

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class DualSolution:
    beta: float
    value: float
    iterations: int
    primal: Marginal


_SMALL = 24  # below this, plain-math loops beat numpy dispatch overhead


def _make_objective(values: np.ndarray, weights: np.ndarray, r: float):
    mask = weights > 0.0
    vz = values[mask]
    vw = weights[mask]
    if vz.size <= _SMALL:
        pairs = tuple(zip(vz.tolist(), vw.tolist()))

        def objective(beta: float) -> float:
            acc = -r
            for z, w in pairs:
                diff = beta - z
                if diff <= 0.0:
                    # Only reachable at the boundary where the product vanishes.
                    return beta
                acc += w * math.log(diff)
            return beta - math.exp(acc)

        return objective

    def objective(beta: float) -> float:
        diffs = beta - vz
        if np.any(diffs <= 0.0):
            return beta
        return beta - math.exp(-r + float(np.dot(vw, np.log(diffs))))

    return objective


def _make_offset_derivative(values: np.ndarray, weights: np.ndarray, r: float, top: float):
    """Dual derivative as a function of u = ln(beta - top).

    Working in the log offset resolves minimizers that sit closer to the
    boundary than one ulp of beta itself (small top-point mass with a wide
    ball pushes the offset to e.g. 1e-16 of the top cost).
    """
    mask = weights > 0.0
    gaps = top - values[mask]  # >= 0; zero for the top point itself
    vw = weights[mask]

    def finish(logp: float, inv_sum: float) -> float:
        if not math.isfinite(inv_sum):
            return -math.inf  # 1/eps blow-up: firmly on the descending side
        g = logp + math.log(inv_sum)
        return -math.inf if g > 700.0 else 1.0 - math.exp(g)

    if gaps.size <= _SMALL:
        pairs = tuple(zip(gaps.tolist(), vw.tolist()))

        def derivative(u: float) -> float:
            eps = math.exp(u)
            logp = -r
            inv_sum = 0.0
            for gap, w in pairs:
                diff = gap + eps
                logp += w * math.log(diff)
                inv_sum += w / diff
            return finish(logp, inv_sum)

        return derivative

    def derivative(u: float) -> float:
        eps = math.exp(u)
        diffs = gaps + eps
        logp = -r + float(np.dot(vw, np.log(diffs)))
        return finish(logp, float(np.sum(vw / diffs)))

    return derivative


def dual_objective(beta: float, empirical: Marginal, r_a: float) -> float:
    """beta - e^{-r} prod_i (beta - z_i)^{q_i}; factors with q_i = 0 drop out."""
    if r_a < 0.0:
        raise ValueError("radius must be nonnegative")
    z_top = empirical.support.max
    if beta < z_top:
        raise ValueError(f"beta={beta!r} below top support point {z_top!r}")
    return _make_objective(empirical.support.points, empirical.probs, r_a)(beta)


def _solve_core(values, weights, r: float, beta_lower: float | None):
    """Shared solver: returns (beta, value, iterations, log_eps, log_prod).

    ``log_eps`` is ln(beta - beta_lower) at an interior stationary point and
    None when the minimum sits on the boundary; ``log_prod`` is the log of
    the product term there.  Golden-section localizes the minimum per the
    derivative-free contract; a bisection on the monotone derivative in
    log-offset space then resolves minimizers arbitrarily close to the
    boundary.
    """
    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if r < 0.0:
        raise ValueError("radius must be nonnegative")
    top = float(values.max()) if beta_lower is None else float(beta_lower)
    if top < float(values.max()) - 1e-12:
        raise ValueError("beta_lower must not be below the largest value")
    if r == 0.0:
        return math.inf, float(np.dot(values, weights)), 0, None, None

    f = _make_objective(values, weights, r)
    # Bracket the minimum by doubling the offset until the objective rises.
    t = 1.0
    doublings = 0
    while f(top + 2.0 * t) <= f(top + t):
        t *= 2.0
        doublings += 1
        if doublings > 200:
            raise RuntimeError(
                f"dual solve: bracket expansion failed (r={r}, top={top}, offset={t})"
            )
    lo, hi = top + 1e-12, top + 2.0 * t

    iterations = 0
    c = hi - _GOLDEN * (hi - lo)
    d = lo + _GOLDEN * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > 1e-10 and iterations < 500:
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - _GOLDEN * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _GOLDEN * (hi - lo)
            fd = f(d)
        iterations += 1
    beta = 0.5 * (lo + hi)
    value = f(beta)
    log_eps = log_prod = None

    # Value comparisons go noise-blind near the flat minimum; the derivative
    # is monotone, so bisecting it in log-offset space pins the minimizer
    # down even when it sits within an ulp of the boundary.
    deriv = _make_offset_derivative(values, weights, r, top)
    u_lo, u_hi = math.log(1e-300), math.log(2.0 * t)
    if deriv(u_lo) < 0.0 < deriv(u_hi):
        while u_hi - u_lo > 1e-12 * max(1.0, abs(u_lo)) and iterations < 900:
            mid = 0.5 * (u_lo + u_hi)
            if deriv(mid) < 0.0:
                u_lo = mid
            else:
                u_hi = mid
            iterations += 1
        log_eps = 0.5 * (u_lo + u_hi)
        eps = math.exp(log_eps)
        mask = weights > 0.0
        log_prod = -r + float(np.dot(weights[mask], np.log((top - values[mask]) + eps)))
        beta = top + eps
        value = top + eps - math.exp(log_prod)

    # The product term vanishes at the boundary when the top point carries
    # all the mass, so the constrained minimum may sit exactly at beta_lower.
    if f(top) < value:
        beta, value = top, f(top)
        log_eps = log_prod = None
    return beta, value, iterations, log_eps, log_prod


def minimize_dual(values, weights, r: float, beta_lower: float | None = None):
    """Minimize the scalar dual objective over [beta_lower, inf).

    ``values``/``weights`` describe any weighted point set (an action's
    empirical pmf, or per-path realizations of a joint empirical).  Returns
    ``(beta, value, iterations)``.  For r = 0 the ball is a point and the
    minimum is the weighted mean, reached as beta -> inf.
    """
    beta, value, iterations, _, _ = _solve_core(values, weights, r, beta_lower)
    return beta, value, iterations


def _reconstruct_primal(empirical: Marginal, r: float, log_eps, log_prod) -> Marginal:
    z = empirical.support.points
    qhat = empirical.probs
    mask = qhat > 0.0
    probs = np.zeros_like(qhat)
    if log_eps is not None:
        # Interior stationary point: q_i proportional to qhat_i/(beta - z_i),
        # evaluated in logs so near-boundary optima stay finite; the sum is 1
        # up to solver tolerance by stationarity.
        eps = math.exp(log_eps)
        w = np.exp(log_prod + np.log(qhat[mask]) - np.log((z[-1] - z[mask]) + eps))
        probs[mask] = w / float(np.sum(w))
        return Marginal(empirical.support, probs)
    if qhat[-1] > 0.0:
        # No interior root with an observed top point only happens when that
        # point carries all the mass; the ball collapses onto it.
        probs[-1] = 1.0
        return Marginal(empirical.support, probs)
    # Boundary minimum with an unobserved top point: observed points keep
    # their stationarity shares and the leftover mass rides on the top.
    gaps = z[-1] - z[mask]
    prod = math.exp(-r + float(np.dot(qhat[mask], np.log(gaps))))
    w = prod * qhat[mask] / gaps
    s = float(np.sum(w))
    if s > 1.0:
        w = w / s
        s = 1.0
    probs[mask] = w
    probs[-1] += 1.0 - s
    return Marginal(empirical.support, probs)


def solve_dual(empirical: Marginal, r_a: float) -> DualSolution:
    """Worst-case expected cost of one action over its KL ball.

    Returns the dual minimizer, the worst-case mean, and the maximizing pmf
    recovered from stationarity (observed points get mass proportional to
    q_i / (beta - z_i); anything left over rides on the top support point).
    """
    if r_a < 0.0:
        raise ValueError("radius must be nonnegative")
    if r_a == 0.0:
        return DualSolution(math.inf, empirical.mean(), 0, empirical)
    beta, value, iterations, log_eps, log_prod = _solve_core(
        empirical.support.points, empirical.probs, r_a, empirical.support.max
    )
    value = min(max(value, empirical.mean()), empirical.support.max)
    return DualSolution(
        beta, value, iterations, _reconstruct_primal(empirical, r_a, log_eps, log_prod)
    )


def _kl_to_rows(qhat: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """KL(qhat || row) for each row, with the usual 0/inf conventions."""
    mask = qhat > 0.0
    with np.errstate(divide="ignore"):
        logs = np.log(rows[:, mask])
    terms = qhat[mask] * (np.log(qhat[mask]) - logs)
    out = np.sum(terms, axis=1)
    out[np.any(rows[:, mask] == 0.0, axis=1)] = np.inf
    return out


def primal_oracle(empirical: Marginal, r_a: float, grid: float = 1e-3) -> float:
    """Feasible-point grid search for the worst-case mean (d <= 4).

    Searches the simplex on a mesh that is repeatedly recentered on the best
    feasible point and refined until the spacing drops to ``grid``.  Every
    candidate is checked against the KL constraint directly, so the result
    never exceeds the true maximum and approaches it to within O(grid).
    """
    d = empirical.support.size
    if d > 4:
        raise ValueError("oracle cost grows as grid^(d-1); use d <= 4")
    if r_a < 0.0:
        raise ValueError("radius must be nonnegative")
    z = empirical.support.points
    qhat = empirical.probs
    if r_a == 0.0 or d == 1:
        return empirical.mean()

    npts = 17
    lo = np.zeros(d - 1)
    hi = np.ones(d - 1)
    best_q = qhat.copy()
    best_val = empirical.mean()
    while True:
        axes = [np.linspace(lo[k], hi[k], npts) for k in range(d - 1)]
        mesh = np.meshgrid(*axes, indexing="ij")
        free = np.stack([m.ravel() for m in mesh], axis=1)
        tail = 1.0 - np.sum(free, axis=1)
        keep = tail >= -1e-12
        free, tail = free[keep], np.maximum(tail[keep], 0.0)
        rows = np.concatenate([free, tail[:, None]], axis=1)
        feasible = _kl_to_rows(qhat, rows) <= r_a
        if np.any(feasible):
            vals = rows[feasible] @ z
            k = int(np.argmax(vals))
            if vals[k] > best_val:
                best_val = float(vals[k])
                best_q = rows[feasible][k]
        spacing = (hi - lo) / (npts - 1)
        if np.all(spacing <= grid):
            return best_val
        half = 4.0 * np.maximum(spacing, grid / 4.0)
        center = best_q[: d - 1]
        lo = np.clip(center - half, 0.0, 1.0)
        hi = np.clip(center + half, 0.0, 1.0)
