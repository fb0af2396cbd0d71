"""Rank-based Pickands estimator of the Pickands dependence function."""

from __future__ import annotations

import numpy as np
from scipy import integrate
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from ._parallel import replicate
from ._validation import InvalidArgumentError
from .copulas import CopulaModel, simplex_full
from .empirical import PseudoObservations, empirical_copula, pseudo_observations
from .rng import stream


def _pobs(p):
    if isinstance(p, PseudoObservations):
        return p.values
    return np.asarray(p, dtype=float)


def _exp_times(v, full):
    """``min_j (-log U_ij) / w_j`` for each observation and each simplex point."""
    lg = -np.log(v)  # (n, d)
    with np.errstate(divide="ignore"):
        inv = np.where(full > 0.0, 1.0 / np.where(full > 0.0, full, 1.0), np.inf)
    # (n_w, n, d) -> min over d; coordinates with w_j = 0 drop out as +inf
    ratio = lg[None, :, :] * inv[:, None, :]
    ratio = np.where(np.isinf(inv)[:, None, :], np.inf, ratio)
    return ratio.min(axis=2)


def _as_simplex(w, d):
    w = np.asarray(w, dtype=float)
    single = w.ndim == 1 or w.ndim == 0
    full = simplex_full(np.atleast_2d(w) if w.ndim else w[None], d)
    full = full.reshape(-1, d)
    if np.any(full.sum(axis=1) <= 0):
        raise InvalidArgumentError("all simplex weights are zero")
    return full, single


def pickands_estimate(p, w, clip=False):
    """Pickands estimator ``[ (1/n) sum_i min_j (-log U_ij) / w_j ]^-1``.

    ``w`` holds the free simplex coordinates ``(w_1, ..., w_{d-1})`` or the
    full vector; several points can be passed as rows. With ``clip`` the
    estimate is projected onto ``[max_j w_j, 1]``.
    """
    v = _pobs(p)
    full, single = _as_simplex(w, v.shape[1])
    est = 1.0 / _exp_times(v, full).mean(axis=1)
    if clip:
        est = np.clip(est, full.max(axis=1), 1.0)
    return float(est[0]) if single else est


def b_process(p, A_true, w, n=None):
    """``sqrt(n) int_0^1 {C_n(u^w) - u^A(w)} du / u`` for interior simplex points.

    With ``u = exp(-s)`` the empirical part becomes a step function of ``s``
    that drops by ``1/n`` at each exponential time ``min_j (-log U_ij)/w_j``;
    the integral is the sum of the rectangle areas under it, and the model part
    integrates to ``1/A(w)``.

    Passing a :class:`CopulaModel` as ``p`` replaces the empirical copula by
    the model cdf and integrates numerically; ``n`` then sets the scaling.
    """
    if isinstance(p, CopulaModel):
        return _b_model(p, A_true, w, n or 1)
    v = _pobs(p)
    nn, d = v.shape
    full, single = _as_simplex(w, d)
    if np.any(full <= 0.0):
        raise InvalidArgumentError("b_process requires w in the interior of the simplex")
    times = np.sort(_exp_times(v, full), axis=1)
    gaps = np.diff(np.concatenate([np.zeros((times.shape[0], 1)), times], axis=1), axis=1)
    heights = (nn - np.arange(nn)) / nn
    emp = gaps @ heights
    A = np.asarray(A_true.pickands(full), dtype=float)
    out = np.sqrt(nn) * (emp - 1.0 / A)
    return float(out[0]) if single else out


def _b_model(model, A_true, w, n):
    full, single = _as_simplex(w, model.d)
    if np.any(full <= 0.0):
        raise InvalidArgumentError("b_process requires w in the interior of the simplex")
    out = []
    for wf in full:
        A = float(A_true.pickands(wf))

        def integrand(s):
            return model.cdf(np.exp(-s * wf)) - np.exp(-s * A)

        val, _ = integrate.quad(integrand, 0.0, np.inf, limit=200)
        out.append(np.sqrt(n) * val)
    return out[0] if single else np.array(out)


def b_process_quadrature(p, A_true, w):
    """Adaptive quadrature of the original ``du/u`` integral, split at the jumps.

    Reference path for :func:`b_process`; slow.
    """
    v = _pobs(p)
    nn, d = v.shape
    full, _ = _as_simplex(w, d)
    wf = full[0]
    A = float(A_true.pickands(wf))
    jumps = np.sort(np.exp(-_exp_times(v, full)[0]))
    edges = np.unique(np.concatenate([[0.0], jumps, [1.0]]))

    def integrand(u):
        return (empirical_copula(v, u ** wf) - u ** A) / u

    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi > lo:
            val, _ = integrate.quad(integrand, lo, hi, epsabs=1e-13, epsrel=1e-11, limit=200)
            total += val
    return np.sqrt(nn) * total


def simplex_grid(size, d=2):
    """Evenly spaced points of the simplex; for d = 2 the values ``t`` in [0, 1]."""
    if d != 2:
        ticks = np.linspace(0.0, 1.0, size)
        pts = [p for p in np.stack(np.meshgrid(*([ticks] * (d - 1)), indexing="ij"), -1).reshape(-1, d - 1)
               if p.sum() <= 1.0 + 1e-12]
        return np.array(pts)
    return np.linspace(0.0, 1.0, size)[:, None]


def pickands_study(generator, A_true, n_ladder, reps, w_grid, seed, threads=1, clip=False):
    """Monte Carlo sup-errors of the Pickands estimator along a sample-size ladder.

    Returns a dict with the per-replication sup-errors and their median and
    mean for every ``n``.
    """
    from .simulation import generate

    if reps < 1:
        raise InvalidArgumentError("reps must be positive")
    w_grid = np.asarray(w_grid, dtype=float)
    d = generator.d
    truth = A_true.pickands(w_grid if w_grid.shape[-1] in (d - 1, d) else w_grid[:, None])
    cells = []
    for idx, n in enumerate(n_ladder):
        def one(r, n=n, idx=idx):
            x, _ = generate(generator, n, stream(seed, idx, r))
            est = pickands_estimate(pseudo_observations(x), w_grid, clip=clip)
            return float(np.max(np.abs(est - truth)))

        errs = np.array(replicate(one, reps, threads))
        cells.append({"n": int(n), "errors": errs.tolist(),
                      "median": float(np.median(errs)), "mean": float(errs.mean())})
    return {"cells": cells}


class PickandsEstimator(BaseEstimator):
    """Rank-based Pickands estimator.

    Parameters
    ----------
    clip : bool, default=False
        Project estimates onto the Pickands bounds ``[max(w), 1]``.
    """

    def __init__(self, clip=False):
        self.clip = clip

    def fit(self, X, y=None):
        X = check_array(X, ensure_min_features=2)
        self.pseudo_observations_ = pseudo_observations(X)
        self.n_samples_, self.n_features_in_ = X.shape
        return self

    def predict(self, w):
        check_is_fitted(self, "pseudo_observations_")
        return pickands_estimate(self.pseudo_observations_, w, clip=self.clip)

    def b_process(self, w, A_true):
        check_is_fitted(self, "pseudo_observations_")
        return b_process(self.pseudo_observations_, A_true, w)
