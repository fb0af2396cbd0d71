"""Empirical copulas, empirical processes and their weighted distances.

The functions here operate on plain arrays. :class:`PseudoObservations` and
:class:`UniformSample` are thin immutable wrappers that carry the data together
with the bookkeeping needed by the diagnostics.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy import stats
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import InvalidArgumentError, as_points, check_sample, check_unit_cube

# above this many histogram cells the counting falls back to direct comparison
_MAX_TABLE = 20_000_000
_CHUNK = 2_000_000


@dataclass(frozen=True)
class PseudoObservations:
    """Rank-transformed sample in (0, 1)^d.

    Attributes
    ----------
    values : ndarray of shape (n, d)
    tie_report : ndarray of shape (d,)
        Largest multiplicity of a value within each column.
    """

    values: np.ndarray
    tie_report: np.ndarray

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def d(self):
        return self.values.shape[1]


@dataclass(frozen=True)
class UniformSample:
    """The latent uniforms ``U_ij = F_j(X_ij)``, available in simulations only."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2:
            raise InvalidArgumentError("uniform sample must be 2-D")
        if np.any(~np.isfinite(v)) or np.any(v < 0) or np.any(v > 1):
            raise InvalidArgumentError("uniform sample entries must lie in [0, 1]")
        object.__setattr__(self, "values", v)

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def d(self):
        return self.values.shape[1]


@dataclass(frozen=True)
class WeightSpec:
    """Boundary weight ``g_omega``; ``variant="gtilde"`` adds one on its zero set."""

    omega: float = 0.25
    variant: str = "g"

    def __post_init__(self):
        if not self.omega >= 0:
            raise InvalidArgumentError("omega must be non-negative")
        if self.variant not in ("g", "gtilde"):
            raise InvalidArgumentError("variant must be 'g' or 'gtilde'")


def _values(obj):
    return obj.values if hasattr(obj, "values") else np.asarray(obj, dtype=float)


def _max_multiplicity(col):
    _, counts = np.unique(col, return_counts=True)
    return int(counts.max())


def pseudo_observations(sample):
    """Column-wise ranks divided by ``n + 1``; ties get average ranks."""
    x = check_sample(_values(sample))
    n = x.shape[0]
    ranks = stats.rankdata(x, method="average", axis=0)
    ties = np.array([_max_multiplicity(x[:, j]) for j in range(x.shape[1])])
    return PseudoObservations(ranks / (n + 1.0), ties)


def ecdf_counts(data, points):
    """Number of rows of ``data`` that are componentwise <= each point.

    Returns an integer array of shape ``points.shape[:-1]``. The result is an
    exact count: small evaluation sets use a cumulative histogram over the
    distinct point coordinates, larger ones a chunked direct comparison.
    """
    data = np.asarray(data, dtype=float)
    pts = as_points(points, data.shape[1], "points")
    shape = pts.shape[:-1]
    flat = pts.reshape(-1, data.shape[1])
    d = data.shape[1]
    axes = [np.unique(flat[:, j]) for j in range(d)]
    cells = int(np.prod([len(a) + 1 for a in axes], dtype=float))
    if cells <= _MAX_TABLE:
        # data value x satisfies x <= q[k] iff searchsorted(q, x, "left") <= k
        bins = np.stack([np.searchsorted(a, data[:, j], side="left")
                         for j, a in enumerate(axes)], axis=1)
        table = np.zeros([len(a) + 1 for a in axes], dtype=np.int64)
        np.add.at(table, tuple(bins.T), 1)
        for ax in range(d):
            np.cumsum(table, axis=ax, out=table)
        idx = tuple(np.searchsorted(a, flat[:, j]) for j, a in enumerate(axes))
        return table[idx].reshape(shape)
    out = np.empty(flat.shape[0], dtype=np.int64)
    step = max(1, _CHUNK // max(1, data.shape[0] * d))
    for start in range(0, flat.shape[0], step):
        block = flat[start:start + step]
        out[start:start + step] = np.all(
            data[None, :, :] <= block[:, None, :], axis=2
        ).sum(axis=1)
    return out.reshape(shape)


def empirical_copula(p, u):
    """Empirical copula: fraction of pseudo-observations below ``u``."""
    v = _values(p)
    u = as_points(u, v.shape[1])
    check_unit_cube(u)
    return ecdf_counts(v, u) / v.shape[0]


def hat_C_process(p, model, u):
    """Empirical copula process ``sqrt(n) (C_n(u) - C(u))``."""
    v = _values(p)
    u = as_points(u, v.shape[1])
    return np.sqrt(v.shape[0]) * (empirical_copula(v, u) - model.cdf(u))


def alpha_n(us, model, u):
    """Empirical process of the latent uniforms, ``sqrt(n) (G_n(u) - C(u))``."""
    v = _values(us)
    u = as_points(u, v.shape[1])
    check_unit_cube(u)
    return np.sqrt(v.shape[0]) * (ecdf_counts(v, u) / v.shape[0] - model.cdf(u))


def _marginal_ecdf(col, x):
    srt = np.sort(col)
    return np.searchsorted(srt, x, side="right") / col.shape[0]


def marginal_alpha(us, j, uj):
    """Marginal empirical process ``sqrt(n) (G_nj(u_j) - u_j)``."""
    col = _values(us)[:, j]
    uj = np.asarray(uj, dtype=float)
    return np.sqrt(col.shape[0]) * (_marginal_ecdf(col, uj) - uj)


def generalized_inverse(col, u):
    """Left-continuous generalized inverse of the empirical cdf of ``col``.

    ``H^-(u) = inf{x : H(x) >= u}`` for ``u`` in (0, 1] and
    ``H^-(0) = sup{x : H(x) = 0}``, which is the smallest observation.
    """
    srt = np.sort(np.asarray(col, dtype=float))
    n = srt.shape[0]
    u = np.asarray(u, dtype=float)
    if np.any((u < 0) | (u > 1)):
        raise InvalidArgumentError("u must lie in [0, 1]")
    levels = np.arange(1, n + 1) / n
    # smallest k with k/n >= u, compared against the exact float levels
    k = np.searchsorted(levels, u, side="left")
    k = np.clip(k, 0, n - 1)
    return srt[k]


def marginal_beta(us, j, uj):
    """Marginal quantile process ``sqrt(n) (G_nj^-(u_j) - u_j)``."""
    col = _values(us)[:, j]
    uj = np.asarray(uj, dtype=float)
    return np.sqrt(col.shape[0]) * (generalized_inverse(col, uj) - uj)


def weight(ws, u):
    """Boundary weight ``g_omega`` (or its zero-set adjusted variant) at ``u``."""
    if not isinstance(ws, WeightSpec):
        ws = WeightSpec(float(ws))
    u = as_points(u)
    d = u.shape[-1]
    lo = np.min(u, axis=-1)
    if d == 2:
        hi = 1.0 - np.max(u, axis=-1)
    else:
        # 1 - (min over coordinates other than j), minimised over j
        srt = np.sort(u, axis=-1)
        hi = 1.0 - srt[..., 1]
    base = np.minimum(lo, hi)
    g = np.where(base > 0.0, np.maximum(base, 0.0) ** ws.omega, 0.0)
    if ws.variant == "gtilde":
        g = g + (g == 0.0)
    return g


def _unit_points(u, j):
    """``u^(j)``: all coordinates set to one except coordinate ``j``."""
    out = np.ones_like(u)
    out[..., j] = u[..., j]
    return out


def bar_C_process(us, model, u):
    """Linearisation ``alpha_n(u) - sum_j C_j(u) alpha_n(u^(j))`` of the copula process.

    The process is set to zero on the zero set of the weight function. Terms
    with ``u_j`` in {0, 1} vanish because ``alpha_n(u^(j))`` is zero there.
    """
    v = _values(us)
    u = as_points(u, v.shape[1])
    check_unit_cube(u)
    shape = u.shape[:-1]
    u = u.reshape(-1, v.shape[1])
    out = np.atleast_1d(alpha_n(v, model, u)).astype(float)
    n = v.shape[0]
    for j in range(v.shape[1]):
        uj = u[:, j]
        inner = (uj > 0.0) & (uj < 1.0)
        if not np.any(inner):
            continue
        sub = u[inner]
        marg = np.sqrt(n) * (_marginal_ecdf(v[:, j], sub[:, j]) - sub[:, j])
        out[inner] -= model.partial(j, sub) * marg
    out[weight(WeightSpec(1.0), u) == 0.0] = 0.0
    return out.reshape(shape) if shape else float(out[0])


def trimmed_lattice(m, d, c, n):
    """``m^d`` uniformly spaced points of ``[c/n, 1 - c/n]^d`` in lexicographic order."""
    t = np.linspace(c / n, 1.0 - c / n, m)
    grids = np.meshgrid(*([t] * d), indexing="ij")
    return np.stack(grids, axis=-1).reshape(-1, d)


def weighted_sup_distance(f, g_proc, ws, c, n, m, jump_points=None):
    """Weighted sup distance ``max |f - g_proc| / g_omega`` over the trimmed box.

    The maximum runs over an ``m^d`` lattice of ``[c/n, 1-c/n]^d`` together with
    ``jump_points`` (typically the pseudo-observations) clipped to the box.
    ``f`` and ``g_proc`` map arrays of points of shape (N, d) to (N,).
    """
    if not 0.0 < c < 1.0:
        raise InvalidArgumentError("trim constant c must lie in (0, 1)")
    if m < 2:
        raise InvalidArgumentError("lattice resolution m must be at least 2")
    if not isinstance(ws, WeightSpec):
        ws = WeightSpec(float(ws))
    if jump_points is None:
        raise InvalidArgumentError("jump_points is required to fix the dimension")
    jp = np.asarray(_values(jump_points), dtype=float)
    d = jp.shape[1]
    pts = trimmed_lattice(m, d, c, n)
    if jp.shape[0]:
        pts = np.concatenate([pts, np.clip(jp, c / n, 1.0 - c / n)])
    g = weight(ws, pts)
    if np.any(g == 0.0):
        raise RuntimeError("weight vanishes inside the trimmed box")
    return float(np.max(np.abs(f(pts) - g_proc(pts)) / g))


def unit_lattice(m, d):
    t = np.arange(m + 1) / m
    grids = np.meshgrid(*([t] * d), indexing="ij")
    return np.stack(grids, axis=-1)


def oscillation_modulus(us, model, delta, mu, m=32):
    """Oscillation modulus of ``alpha_n`` on the lattice ``{k/m}^d``.

    Maximises ``|alpha_n(u) - alpha_n(v)| / max(|u - v|^mu, n^-mu)`` over
    lattice pairs with Euclidean distance at most ``delta``.
    """
    if not 0.0 < delta <= 1.0:
        raise InvalidArgumentError("delta must lie in (0, 1]")
    if not 0.0 < mu <= 0.5:
        raise InvalidArgumentError("mu must lie in (0, 1/2]")
    v = _values(us)
    n, d = v.shape
    grid = unit_lattice(m, d)
    a = alpha_n(v, model, grid)
    reach = int(np.floor(delta * m + 1e-12))
    floor = n ** (-mu)
    best = 0.0
    for off in itertools.product(range(-reach, reach + 1), repeat=d):
        # one representative of each {off, -off} pair
        if off <= tuple([0] * d):
            continue
        dist = np.sqrt(sum(o * o for o in off)) / m
        if dist > delta + 1e-12:
            continue
        src = tuple(slice(max(0, -o), m + 1 - max(0, o)) for o in off)
        dst = tuple(slice(max(0, o), m + 1 - max(0, -o)) for o in off)
        diff = np.abs(a[dst] - a[src])
        if diff.size:
            best = max(best, float(diff.max()) / max(dist ** mu, floor))
    return best


def max_jump(sample, j):
    """Largest jump of the j-th marginal empirical cdf: max multiplicity / n."""
    col = _values(sample)[:, j]
    return _max_multiplicity(col) / col.shape[0]


def weighted_alpha_sup(us, j, omega, m=256):
    """``sup_u |alpha_nj(u)| / (u(1-u))^omega`` over (0, 1).

    Evaluated at every jump of the marginal empirical cdf (from both sides) and
    on an interior lattice of resolution ``m``.
    """
    col = np.sort(_values(us)[:, j])
    n = col.shape[0]
    inner = col[(col > 0) & (col < 1)]
    k = np.searchsorted(col, inner, side="right")
    left = np.searchsorted(col, inner, side="left")
    lattice = np.arange(1, m) / m
    u = np.concatenate([inner, inner, lattice])
    G = np.concatenate([k / n, left / n, _marginal_ecdf(col, lattice)])
    w = (u * (1.0 - u)) ** omega
    return float(np.max(np.sqrt(n) * np.abs(G - u) / w))


def weighted_beta_sup(us, j, omega, lam, theta3=1.0):
    """``sup |beta_nj(u)| / (u(1-u))^omega`` over ``(n^-lam, 1 - n^-lam)``.

    The generalized inverse is constant on ``((k-1)/n, k/n]``, so the supremum
    is attained at level points or at the right of the preceding level.
    """
    if not 0.0 < lam < theta3:
        raise InvalidArgumentError("window exponent lambda must lie in (0, theta3)")
    col = np.sort(_values(us)[:, j])
    n = col.shape[0]
    lo, hi = n ** (-lam), 1.0 - n ** (-lam)
    if not lo < hi:
        return 0.0
    levels = np.arange(1, n + 1) / n
    right_of = np.nextafter(np.arange(0, n) / n, 2.0)
    u = np.concatenate([levels, right_of, [np.nextafter(lo, 2.0), np.nextafter(hi, -1.0)]])
    u = u[(u > lo) & (u < hi)]
    if u.size == 0:
        return 0.0
    beta = np.sqrt(n) * (generalized_inverse(col, u) - u)
    return float(np.max(np.abs(beta) / (u * (1.0 - u)) ** omega))


class RankTransformer(TransformerMixin, BaseEstimator):
    """Map a sample to its pseudo-observations, column by column.

    ``fit`` stores nothing but the input width; ``transform`` ranks the data it
    is given, so the transform is only meaningful on the sample as a whole.
    """

    def fit(self, X, y=None):
        X = check_array(X, ensure_min_features=1)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise InvalidArgumentError("number of columns differs from fit")
        return pseudo_observations(X).values


class EmpiricalCopula(BaseEstimator):
    """Empirical copula of a sample.

    Parameters
    ----------
    model : CopulaModel, optional
        Reference copula used by :meth:`process`.

    Attributes
    ----------
    pseudo_observations_ : PseudoObservations
    n_samples_ : int
    """

    def __init__(self, model=None):
        self.model = model

    def fit(self, X, y=None):
        X = check_array(X, ensure_min_features=2)
        self.pseudo_observations_ = pseudo_observations(X)
        self.n_samples_, self.n_features_in_ = X.shape
        return self

    def cdf(self, u):
        check_is_fitted(self, "pseudo_observations_")
        return empirical_copula(self.pseudo_observations_, u)

    def process(self, u):
        """Empirical copula process against ``model``."""
        check_is_fitted(self, "pseudo_observations_")
        if self.model is None:
            raise InvalidArgumentError("a reference model is required")
        return hat_C_process(self.pseudo_observations_, self.model, u)

    def max_jump(self, j):
        check_is_fitted(self, "pseudo_observations_")
        return max_jump(self.pseudo_observations_, j)
