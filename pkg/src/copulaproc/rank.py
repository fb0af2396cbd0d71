"""Bivariate rank statistics and their score functions.

A rank statistic averages a score ``J`` over the bivariate pseudo-observations.
The module provides the van der Waerden, Wilcoxon and Gaussian
pseudo-likelihood scores, rank autocorrelations, the i.i.d. asymptotic variance
by quadrature, admissibility diagnostics for a score, and a Monte Carlo study of
the central limit theorem.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import special, stats
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from . import hk
from ._quadrature import dyadic_breaks, dyadic_rule, panel_rule
from ._validation import InvalidArgumentError, QuadratureError, check_sample
from .empirical import ecdf_counts, pseudo_observations, weight, WeightSpec


def _phi(z):
    return np.exp(-0.5 * z * z) / np.sqrt(2.0 * np.pi)


@dataclass(frozen=True)
class ScoreFunction:
    """Score ``J(u, v)`` on (0, 1)^2 with optional analytic derivatives.

    ``d1``, ``d2`` are the first partials and ``d12`` the mixed second partial.
    ``factors``, when given, is a pair ``(J1, J2)`` with ``J(u, v) = J1(u) J2(v)``;
    rank autocorrelations use it.
    """

    name: str
    J: Callable
    d1: Optional[Callable] = None
    d2: Optional[Callable] = None
    d12: Optional[Callable] = None
    omega: float = 0.25
    factors: Optional[tuple] = None

    def __call__(self, u, v):
        return self.J(np.asarray(u, dtype=float), np.asarray(v, dtype=float))


def score_vdw(omega=0.25):
    """van der Waerden score ``Phi^-1(u) Phi^-1(v)``."""
    q = special.ndtri
    return ScoreFunction(
        "vdw",
        J=lambda u, v: q(u) * q(v),
        d1=lambda u, v: q(v) / _phi(q(u)),
        d2=lambda u, v: q(u) / _phi(q(v)),
        d12=lambda u, v: 1.0 / (_phi(q(u)) * _phi(q(v))),
        omega=omega,
        factors=(q, q),
    )


def score_wilcoxon(omega=0.25):
    """Wilcoxon score ``(u - 1/2) log(v / (1 - v))``."""
    return ScoreFunction(
        "wilcoxon",
        J=lambda u, v: (u - 0.5) * special.logit(v),
        d1=lambda u, v: special.logit(v) + 0.0 * u,
        d2=lambda u, v: (u - 0.5) / (v * (1.0 - v)),
        d12=lambda u, v: 1.0 / (v * (1.0 - v)) + 0.0 * u,
        omega=omega,
        factors=(lambda u: u - 0.5, special.logit),
    )


def score_gaussian_pml(theta, omega=0.25):
    """Derivative in ``theta`` of the bivariate Gaussian copula log-density."""
    theta = float(theta)
    if not -1.0 < theta < 1.0:
        raise InvalidArgumentError("theta must lie in (-1, 1)")
    q = special.ndtri
    den = (1.0 - theta * theta) ** 2
    s = 1.0 + theta * theta

    def J(u, v):
        a, b = q(u), q(v)
        return (theta * (1.0 - theta * theta) - theta * (a * a + b * b) + s * a * b) / den

    return ScoreFunction(
        f"pml-gauss:theta={theta!r}",
        J=J,
        d1=lambda u, v: (-2.0 * theta * q(u) + s * q(v)) / (den * _phi(q(u))),
        d2=lambda u, v: (-2.0 * theta * q(v) + s * q(u)) / (den * _phi(q(v))),
        d12=lambda u, v: s / (den * _phi(q(u)) * _phi(q(v))),
        omega=omega,
    )


def score_constant(c=1.0):
    c = float(c)
    zero = lambda u, v: 0.0 * u * v  # noqa: E731
    return ScoreFunction(f"const:{c!r}", J=lambda u, v: c + 0.0 * u * v,
                         d1=zero, d2=zero, d12=zero)


def score_product():
    """Smooth bounded score ``u v``."""
    return ScoreFunction(
        "product",
        J=lambda u, v: u * v,
        d1=lambda u, v: v + 0.0 * u,
        d2=lambda u, v: u + 0.0 * v,
        d12=lambda u, v: 1.0 + 0.0 * u * v,
        factors=(lambda u: u, lambda v: v),
    )


_SCORE_RE = re.compile(r"^\s*([A-Za-z-]+)\s*(?::\s*(.*))?$")


def parse_score(text):
    """Parse ``vdw``, ``wilcoxon`` or ``pml-gauss:theta=0.5``."""
    m = _SCORE_RE.match(text or "")
    if not m:
        raise InvalidArgumentError(f"cannot parse score {text!r}")
    name = m.group(1).lower()
    args = {}
    if m.group(2):
        for item in m.group(2).split(","):
            key, sep, val = item.partition("=")
            if not sep:
                raise InvalidArgumentError(f"bad score argument {item!r}")
            try:
                args[key.strip().lower()] = float(val)
            except ValueError:
                raise InvalidArgumentError(f"bad value in {item!r}") from None
    allowed = {"vdw": {"omega"}, "wilcoxon": {"omega"},
               "pml-gauss": {"theta", "omega"}, "product": set()}
    if name not in allowed:
        raise InvalidArgumentError(f"unknown score {name!r}")
    if set(args) - allowed[name]:
        raise InvalidArgumentError(f"unknown keys for score {name!r}: {sorted(set(args) - allowed[name])}")
    if name == "vdw":
        return score_vdw(**args)
    if name == "wilcoxon":
        return score_wilcoxon(**args)
    if name == "product":
        return score_product()
    if "theta" not in args:
        raise InvalidArgumentError("pml-gauss requires theta")
    return score_gaussian_pml(**args)


# -- statistics -----------------------------------------------------------


def rank_statistic(sample, J):
    """``(1/n) sum_i J(U_i1, U_i2)`` over the pseudo-observations of the first two columns."""
    x = np.asarray(getattr(sample, "values", sample), dtype=float)
    if x.ndim != 2 or x.shape[0] == 0:
        raise InvalidArgumentError("rank statistic needs a non-empty 2-D sample")
    x = check_sample(x[:, :2], min_dim=2)
    p = pseudo_observations(x).values
    return float(np.mean(J(p[:, 0], p[:, 1])))


def empirical_copula_grid(sample):
    """Empirical copula of the first two columns as a right-continuous grid function.

    Knots are ``0`` followed by the distinct pseudo-observation values.
    """
    x = check_sample(np.asarray(getattr(sample, "values", sample), dtype=float)[:, :2], min_dim=2)
    p = pseudo_observations(x).values
    kx = np.concatenate([[0.0], np.unique(p[:, 0])])
    ky = np.concatenate([[0.0], np.unique(p[:, 1])])
    X, Y = np.meshgrid(kx, ky, indexing="ij")
    counts = ecdf_counts(p, np.stack([X, Y], axis=-1))
    return hk.GridFunction2D(kx, ky, counts / p.shape[0])


def rank_statistic_ls(sample, J):
    """The same statistic as a Lebesgue-Stieltjes integral against the empirical copula."""
    f = empirical_copula_grid(sample)
    n = np.asarray(getattr(sample, "values", sample)).shape[0]
    top = (f.x[-1], f.y[-1])
    if n < 1:
        raise InvalidArgumentError("empty sample")
    return hk.ls_integral(lambda u, v: J(u, v), hk.measure_from_function(f),
                          ((0.0, 0.0), top))


def lag_ranks(series):
    """``n/(n+1) F_n(Y_i)`` with ``F_n`` the empirical cdf of the whole series."""
    y = np.asarray(series, dtype=float).ravel()
    if not np.all(np.isfinite(y)):
        raise InvalidArgumentError("series contains non-finite values")
    n = y.size
    return np.searchsorted(np.sort(y), y, side="right") / (n + 1.0)


def rank_autocorrelation(series, k, J1, J2):
    """Rank autocorrelation of lag ``k`` with univariate scores ``J1`` and ``J2``."""
    y = np.asarray(getattr(series, "values", series), dtype=float).ravel()
    n = y.size
    k = int(k)
    if k < 1 or k >= n:
        raise InvalidArgumentError("lag must satisfy 1 <= k < n")
    a = lag_ranks(y)
    return float(np.mean(J1(a[k:]) * J2(a[:-k])))


# -- quadrature -----------------------------------------------------------


def _density(model):
    if model.family == "independence":
        return lambda u, v: np.ones(np.broadcast(u, v).shape)
    return lambda u, v: model.second_partial(0, 1, np.stack(np.broadcast_arrays(u, v), -1))


def score_mean(model, J, order=16, depth=40):
    """``E J(U)`` for ``U ~ model`` by product quadrature against the copula density."""
    x, w = dyadic_rule(order, depth)
    U, V = np.meshgrid(x, x, indexing="ij")
    W = np.outer(w, w)
    return float(np.sum(W * J(U, V) * _density(model)(U, V)))


def _sigma2_once(model, J, order, depth):
    breaks = dyadic_breaks(0.0, 1.0, depth)
    eps = breaks[0]
    top = breaks[-1]
    x, w = panel_rule(breaks, order)
    U, V = np.meshgrid(x, x, indexing="ij")
    W = np.outer(w, w)
    dens = _density(model)
    gq, gw = np.polynomial.legendre.leggauss(order)

    def section_integral(j, s):
        # g_j(s) = int C_j(u) J12(u) dt with u_j = s, the other coordinate integrated
        s = np.asarray(s)
        out = np.empty(s.size)
        step = max(1, 2_000_000 // x.size)
        for lo in range(0, s.size, step):
            S = np.broadcast_to(s[lo:lo + step, None], (min(step, s.size - lo), x.size))
            T = np.broadcast_to(x[None, :], S.shape)
            pts = np.stack([S, T], -1) if j == 0 else np.stack([T, S], -1)
            vals = model.partial(j, pts) * J.d12(pts[..., 0], pts[..., 1])
            out[lo:lo + step] = vals @ w
        return out

    def tail(j):
        # G_j(x) = int_x^top g_j(s) ds at every outer node x
        full = section_integral(j, x) * w
        per_panel = full.reshape(-1, order).sum(axis=1)
        after = np.concatenate([np.cumsum(per_panel[::-1])[::-1][1:], [0.0]])
        panel_end = np.repeat(breaks[1:], order)
        # partial panel [x, panel end] by a mapped Gauss-Legendre rule
        a = x[:, None]
        b = panel_end[:, None]
        sub = (a + b) / 2 + (b - a) / 2 * gq[None, :]
        vals = section_integral(j, sub.ravel()).reshape(sub.shape)
        partial_panel = np.sum(vals * (b - a) / 2 * gw[None, :], axis=1)
        return np.repeat(after, order) + partial_panel

    a1 = J(x, np.full(x.shape, top)) + tail(0)
    a2 = J(np.full(x.shape, top), x) + tail(1)
    psi = J(U, V) - a1[:, None] - a2[None, :]
    mass = W * dens(U, V)
    total = mass.sum()
    mean = np.sum(mass * psi) / total
    return float(np.sum(mass * (psi - mean) ** 2) / total), eps


def sigma2_iid(model, J, rtol=1e-6, atol=1e-10, order=6, max_order=24, depth=40):
    """Asymptotic variance of ``sqrt(n) (R_n - E J)`` for i.i.d. data.

    Evaluates ``int int k(u, v) J12(u) J12(v) du dv`` with ``k`` the covariance
    of the limiting copula process. The inner integral is carried out in closed
    form along the indicator structure of ``k``, which reduces the
    four-dimensional integral to the variance of a single function of ``U``.
    Product Gauss-Legendre panels with dyadic boundary layers down to
    ``2^-depth`` are used; the node count is doubled until two successive
    values agree to ``rtol``.
    """
    if J.d12 is None:
        raise InvalidArgumentError("sigma2_iid needs an analytic mixed density d12")
    if model.d != 2:
        raise InvalidArgumentError("sigma2_iid is bivariate")
    history = []
    prev = None
    k = order
    while k <= max_order:
        val, _ = _sigma2_once(model, J, k, depth)
        history.append((k, val))
        if not np.isfinite(val):
            break
        if prev is not None and abs(val - prev) <= rtol * abs(val) + atol:
            return max(val, 0.0)
        prev = val
        k *= 2
    raise QuadratureError("sigma2 quadrature did not converge", {"history": history})


# -- admissibility --------------------------------------------------------


def _loglog_slope(deltas, values):
    x = np.log(1.0 / np.asarray(deltas))
    y = np.log(np.maximum(np.asarray(values), 1e-300))
    return float(np.polyfit(x, y, 1)[0])


def score_admissibility(J, omega=None, deltas=None, growth_tol=0.1, order=8, depth=30):
    """Numerical evidence that ``J`` meets the growth and integrability conditions.

    Three diagnostics are evaluated on a decreasing ladder of ``delta``:

    * the boundary growth ``max |J| g_omega`` over ``[delta, 1-delta]^2``,
      whose fitted exponent in ``1/delta`` must not exceed ``growth_tol``;
    * the weighted density integral ``int g_omega |J12|`` over the same boxes,
      whose increments must shrink (monotone convergence);
    * the four section integrals of ``|J1|`` and ``|J2|`` along the box edges,
      whose fitted growth exponent must not exceed ``omega``.
    """
    omega = J.omega if omega is None else float(omega)
    if deltas is None:
        deltas = 0.1 * 2.0 ** -np.arange(0, 14)
    deltas = np.asarray(deltas, dtype=float)
    if np.any(np.diff(deltas) >= 0) or deltas[0] > 0.1 or deltas[-1] <= 0:
        raise InvalidArgumentError("delta ladder must decrease strictly inside (0, 0.1]")
    ws = WeightSpec(omega)
    report = {"score": J.name, "omega": omega, "deltas": deltas.tolist()}

    growth = []
    for dl in deltas:
        t = np.concatenate([dyadic_breaks(dl, 1.0 - dl, 12), np.linspace(dl, 1 - dl, 65)])
        U, V = np.meshgrid(t, t, indexing="ij")
        g = weight(ws, np.stack([U, V], -1))
        growth.append(float(np.max(np.abs(J(U, V)) * g)))
    growth = np.array(growth)
    tail = slice(len(deltas) // 2, None)
    growth_exp = _loglog_slope(deltas[tail], growth[tail]) if np.all(growth > 0) else 0.0
    report["growth"] = growth.tolist()
    report["growth_exponent"] = growth_exp
    report["growth_pass"] = bool(growth_exp <= growth_tol)

    if J.d12 is not None:
        integrals = []
        for dl in deltas:
            x, w = dyadic_rule(order, depth, dl, 1.0 - dl)
            U, V = np.meshgrid(x, x, indexing="ij")
            g = weight(ws, np.stack([U, V], -1))
            integrals.append(float(np.sum(np.outer(w, w) * g * np.abs(J.d12(U, V)))))
        integrals = np.array(integrals)
        inc = np.abs(np.diff(integrals))
        report["density_integral"] = integrals.tolist()
        if np.all(inc[-3:] <= 1e-12 * max(1.0, integrals[-1])):
            report["density_pass"] = True
        else:
            rate = -_loglog_slope(deltas[1:][tail], inc[tail] + 1e-300)
            report["density_increment_exponent"] = rate
            report["density_pass"] = bool(rate > 0.0)
    else:
        report["density_pass"] = None

    if J.d1 is not None and J.d2 is not None:
        sections = []
        for dl in deltas:
            x, w = dyadic_rule(order, depth, dl, 1.0 - dl)
            lo = np.full(x.shape, dl)
            hi = np.full(x.shape, 1.0 - dl)
            vals = [np.abs(J.d1(x, lo)) @ w, np.abs(J.d1(x, hi)) @ w,
                    np.abs(J.d2(lo, x)) @ w, np.abs(J.d2(hi, x)) @ w]
            sections.append(max(vals))
        sections = np.array(sections)
        sec_exp = _loglog_slope(deltas[tail], sections[tail]) if np.all(sections > 0) else 0.0
        report["section_growth"] = sections.tolist()
        report["section_exponent"] = sec_exp
        report["section_pass"] = bool(sec_exp <= omega)
    else:
        report["section_pass"] = None

    checks = [report["growth_pass"], report["density_pass"], report["section_pass"]]
    report["pass"] = bool(all(c is not False for c in checks))
    return report


class RankStatistic(BaseEstimator):
    """Bivariate rank statistic as an estimator.

    Parameters
    ----------
    score : str or ScoreFunction, default="vdw"

    Attributes
    ----------
    statistic_ : float
    n_samples_ : int
    """

    def __init__(self, score="vdw"):
        self.score = score

    def _score(self):
        return parse_score(self.score) if isinstance(self.score, str) else self.score

    def fit(self, X, y=None):
        X = check_array(X, ensure_min_features=2)
        self.statistic_ = rank_statistic(X, self._score())
        self.n_samples_ = X.shape[0]
        return self

    def standardized(self, mean=0.0):
        """``sqrt(n) (R_n - mean)``."""
        check_is_fitted(self, "statistic_")
        return float(np.sqrt(self.n_samples_) * (self.statistic_ - mean))


def ks_to_fitted_normal(values):
    """Kolmogorov-Smirnov distance between a sample and the normal with its moments."""
    values = np.asarray(values, dtype=float)
    sd = values.std(ddof=1)
    if sd == 0:
        return 1.0
    return float(stats.kstest(values, "norm", args=(values.mean(), sd)).statistic)
