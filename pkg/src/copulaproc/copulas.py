"""Parametric copula families.

Four families are supported: independence, Gaussian, Clayton and Gumbel. Each
model evaluates its cdf, first and second order partial derivatives and draws
i.i.d. samples. The extreme-value families (independence, Gumbel) also expose
their Pickands dependence function.

All evaluation methods are vectorised: points are arrays of shape ``(..., d)``
and coordinate indices are zero-based.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

from ._validation import DomainError, InvalidArgumentError, as_points, check_unit_cube

FAMILIES = ("independence", "gaussian", "clayton", "gumbel")
_ALIASES = {"indep": "independence", "independence": "independence",
            "gaussian": "gaussian", "normal": "gaussian",
            "clayton": "clayton", "gumbel": "gumbel"}
_KEYS = {"independence": {"d"}, "gaussian": {"rho", "d"},
         "clayton": {"theta", "d"}, "gumbel": {"theta", "d"}}


def _fd_step(x):
    return np.maximum(1e-6, 1e-4 * np.minimum(x, 1.0 - x))


def bvn_cdf(h, k, rho):
    """Standard bivariate normal cdf P(Z1 <= h, Z2 <= k) via Owen's T function."""
    h, k = np.broadcast_arrays(np.asarray(h, float), np.asarray(k, float))
    out = np.empty(h.shape)
    if abs(rho) < 1e-300:
        return special.ndtr(h) * special.ndtr(k)
    s = np.sqrt((1.0 - rho) * (1.0 + rho))
    lo = np.isneginf(h) | np.isneginf(k)
    out[lo] = 0.0
    hinf = np.isposinf(h) & ~lo
    kinf = np.isposinf(k) & ~lo
    out[hinf] = special.ndtr(k[hinf])
    out[kinf & ~hinf] = special.ndtr(h[kinf & ~hinf])
    fin = ~(lo | hinf | kinf)
    hf = h[fin].copy()
    kf = k[fin].copy()
    hf[hf == 0.0] = 1e-300
    kf[kf == 0.0] = 1e-300
    with np.errstate(over="ignore"):
        ah = (kf - rho * hf) / (hf * s)
        ak = (hf - rho * kf) / (kf * s)
    beta = np.where(hf * kf < 0.0, 0.5, 0.0)
    val = (0.5 * special.ndtr(hf) + 0.5 * special.ndtr(kf)
           - special.owens_t(hf, ah) - special.owens_t(kf, ak) - beta)
    out[fin] = np.clip(val, 0.0, 1.0)
    return out


def _mvn_cdf(z, cov):
    """Centered normal cdf at the rows of ``z`` (shape (N, k))."""
    k = z.shape[-1]
    if k == 1:
        return special.ndtr(z[..., 0] / np.sqrt(cov[0, 0]))
    sd = np.sqrt(np.diag(cov))
    zs = z / sd
    if k == 2:
        r = cov[0, 1] / (sd[0] * sd[1])
        return bvn_cdf(zs[..., 0], zs[..., 1], r)
    corr = cov / np.outer(sd, sd)
    # condition on the first coordinate and integrate it out by Gauss-Legendre
    r = corr[1:, 0]
    cond = corr[1:, 1:] - np.outer(r, r)
    nodes, weights = _GL_NODES
    flat = zs.reshape(-1, k)
    out = np.empty(flat.shape[0])
    for i, row in enumerate(flat):
        top = min(row[0], 12.0)
        if top <= -12.0:
            out[i] = 0.0
            continue
        t = -12.0 + (top + 12.0) * (nodes + 1.0) / 2.0
        inner = _mvn_cdf(row[None, 1:] - t[:, None] * r[None, :], cond)
        dens = np.exp(-0.5 * t * t) / np.sqrt(2.0 * np.pi)
        out[i] = (top + 12.0) / 2.0 * np.sum(weights * dens * inner)
    return out.reshape(zs.shape[:-1])


_GL_NODES = np.polynomial.legendre.leggauss(160)


@dataclass
class CopulaModel:
    """A parametric copula.

    Parameters
    ----------
    family : {"independence", "gaussian", "clayton", "gumbel"}
    d : int
        Dimension, at least 2.
    rho : float, optional
        Equicorrelation of the Gaussian copula, in (-1, 1).
    theta : float, optional
        Clayton (theta > 0) or Gumbel (theta >= 1) parameter.
    corr : array-like, optional
        Full correlation matrix for the Gaussian family; overrides ``rho``.
    """

    family: str
    d: int = 2
    rho: float | None = None
    theta: float | None = None
    corr: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        fam = _ALIASES.get(str(self.family).lower())
        if fam is None:
            raise InvalidArgumentError(f"unknown copula family {self.family!r}")
        self.family = fam
        self.d = int(self.d)
        if self.d < 2:
            raise InvalidArgumentError("copula dimension must be at least 2")
        if fam == "gaussian":
            if self.corr is None:
                rho = 0.0 if self.rho is None else float(self.rho)
                if not -1.0 < rho < 1.0:
                    raise InvalidArgumentError("gaussian rho must lie in (-1, 1)")
                self.rho = rho
                corr = np.full((self.d, self.d), rho)
                np.fill_diagonal(corr, 1.0)
            else:
                corr = np.asarray(self.corr, dtype=float)
                if corr.shape != (self.d, self.d):
                    raise InvalidArgumentError("correlation matrix has the wrong shape")
            _check_correlation(corr)
            self.corr = corr
        elif fam == "clayton":
            if self.theta is None or not self.theta > 0:
                raise InvalidArgumentError("clayton theta must be > 0")
            self.theta = float(self.theta)
        elif fam == "gumbel":
            if self.theta is None or not self.theta >= 1:
                raise InvalidArgumentError("gumbel theta must be >= 1")
            self.theta = float(self.theta)

    # -- descriptors -----------------------------------------------------

    @property
    def is_extreme_value(self):
        return self.family in ("independence", "gumbel")

    def spec_string(self):
        """Inverse of :func:`parse_model`."""
        if self.family == "independence":
            return f"indep:d={self.d}"
        if self.family == "gaussian":
            if self.rho is not None and np.allclose(
                self.corr[~np.eye(self.d, dtype=bool)], self.rho
            ):
                return f"gaussian:rho={self.rho!r},d={self.d}"
            return f"gaussian:d={self.d}"
        return f"{self.family}:theta={self.theta!r},d={self.d}"

    # -- cdf -------------------------------------------------------------

    def cdf(self, u):
        u = as_points(u, self.d)
        check_unit_cube(u)
        fam = self.family
        if fam == "independence":
            return np.prod(u, axis=-1)
        if fam == "clayton":
            th = self.theta
            with np.errstate(divide="ignore", over="ignore"):
                s = np.sum(u ** (-th), axis=-1) - (self.d - 1)
                out = s ** (-1.0 / th)
            return np.where(np.any(u == 0.0, axis=-1), 0.0, out)
        if fam == "gumbel":
            th = self.theta
            with np.errstate(divide="ignore"):
                lg = -np.log(u)
            s = np.sum(lg ** th, axis=-1)
            return np.exp(-s ** (1.0 / th))
        return self._gauss_cdf(u)

    def _gauss_cdf(self, u):
        z = special.ndtri(u)
        if self.d == 2:
            return bvn_cdf(z[..., 0], z[..., 1], self.corr[0, 1])
        out = np.zeros(u.shape[:-1])
        zero = np.any(u == 0.0, axis=-1)
        ones = u == 1.0
        flat_u = u.reshape(-1, self.d)
        flat_out = out.reshape(-1)
        for idx in np.flatnonzero(~zero.reshape(-1)):
            keep = ~ones.reshape(-1, self.d)[idx]
            if not keep.any():
                flat_out[idx] = 1.0
                continue
            sub = self.corr[np.ix_(keep, keep)]
            flat_out[idx] = _mvn_cdf(special.ndtri(flat_u[idx, keep])[None, :], sub)[0]
        return flat_out.reshape(u.shape[:-1])

    # -- first order partials ---------------------------------------------

    def partial(self, j, u):
        """Partial derivative of the cdf with respect to coordinate ``j``.

        Raises :class:`DomainError` when ``u_j`` is 0 or 1.
        """
        u = as_points(u, self.d)
        check_unit_cube(u)
        j = self._check_index(j)
        uj = u[..., j]
        if np.any((uj <= 0.0) | (uj >= 1.0)):
            raise DomainError("partial derivative requires u_j in (0, 1)")
        fam = self.family
        if fam == "independence":
            return np.prod(np.delete(u, j, axis=-1), axis=-1)
        if fam == "clayton":
            th = self.theta
            others0 = np.any(np.delete(u, j, axis=-1) == 0.0, axis=-1)
            with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
                s = np.sum(u ** (-th), axis=-1) - (self.d - 1)
                val = uj ** (-th - 1.0) * s ** (-1.0 / th - 1.0)
            return np.clip(np.where(others0, 0.0, val), 0.0, 1.0)
        if fam == "gumbel":
            th = self.theta
            with np.errstate(divide="ignore", invalid="ignore"):
                lg = -np.log(u)
                s = np.sum(lg ** th, axis=-1)
                c = np.exp(-s ** (1.0 / th))
                val = c * s ** (1.0 / th - 1.0) * lg[..., j] ** (th - 1.0) / uj
            others0 = np.any(np.delete(u, j, axis=-1) == 0.0, axis=-1)
            val = np.where(others0, 0.0, val)
            # all other coordinates equal to one: the section is the identity
            val = np.where(np.all(np.delete(u, j, axis=-1) == 1.0, axis=-1), 1.0, val)
            return np.clip(val, 0.0, 1.0)
        return self._gauss_partial(j, u)

    def _gauss_partial(self, j, u):
        z = special.ndtri(u)
        R = self.corr
        others = [k for k in range(self.d) if k != j]
        r = R[others, j]
        cond_cov = R[np.ix_(others, others)] - np.outer(r, r)
        zo = z[..., others] - z[..., j, None] * r
        if self.d == 2:
            s = np.sqrt(cond_cov[0, 0])
            with np.errstate(invalid="ignore"):
                return special.ndtr(zo[..., 0] / s)
        flat = zo.reshape(-1, self.d - 1)
        out = np.empty(flat.shape[0])
        for i, row in enumerate(flat):
            if np.any(np.isneginf(row)):
                out[i] = 0.0
                continue
            keep = ~np.isposinf(row)
            if not keep.any():
                out[i] = 1.0
                continue
            out[i] = _mvn_cdf(row[keep][None, :], cond_cov[np.ix_(keep, keep)])[0]
        return np.clip(out.reshape(zo.shape[:-1]), 0.0, 1.0)

    # -- second order partials --------------------------------------------

    def second_partial(self, j1, j2, u):
        """Second order partial derivative with respect to ``u_j1`` and ``u_j2``."""
        u = as_points(u, self.d)
        check_unit_cube(u)
        j1 = self._check_index(j1)
        j2 = self._check_index(j2)
        for j in (j1, j2):
            if np.any((u[..., j] <= 0.0) | (u[..., j] >= 1.0)):
                raise DomainError("second partial requires interior coordinates")
        fam = self.family
        if fam == "independence":
            if j1 == j2:
                return np.zeros(u.shape[:-1])
            return np.prod(np.delete(u, [j1, j2], axis=-1), axis=-1)
        if fam == "clayton":
            return self._clayton_second(j1, j2, u)
        if fam == "gumbel":
            return self._gumbel_second(j1, j2, u)
        if self.d == 2:
            return self._gauss_second_2d(j1, j2, u)
        return self._fd_second(j1, j2, u)

    def _clayton_second(self, j1, j2, u):
        th = self.theta
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            s = np.sum(u ** (-th), axis=-1) - (self.d - 1)
            if j1 != j2:
                val = ((1.0 + th) * u[..., j1] ** (-th - 1.0) * u[..., j2] ** (-th - 1.0)
                       * s ** (-1.0 / th - 2.0))
            else:
                x = u[..., j1]
                val = ((th + 1.0) * x ** (-th - 2.0) * s ** (-1.0 / th - 2.0)
                       * (x ** (-th) - s))
        return np.nan_to_num(val, nan=0.0, posinf=0.0, neginf=0.0)

    def _gumbel_second(self, j1, j2, u):
        th = self.theta
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            lg = -np.log(u)
            s = np.sum(lg ** th, axis=-1)
            c = np.exp(-s ** (1.0 / th))
            if j1 != j2:
                a, b = lg[..., j1], lg[..., j2]
                val = (c * (a * b) ** (th - 1.0) / (u[..., j1] * u[..., j2])
                       * s ** (1.0 / th - 2.0) * (s ** (1.0 / th) + th - 1.0))
            else:
                x = u[..., j1]
                ell = lg[..., j1]
                val = c / x ** 2 * (
                    s ** (2.0 / th - 2.0) * ell ** (2.0 * th - 2.0)
                    + (th - 1.0) * s ** (1.0 / th - 2.0) * ell ** (2.0 * th - 2.0)
                    - s ** (1.0 / th - 1.0) * ((th - 1.0) * ell ** (th - 2.0) + ell ** (th - 1.0))
                )
        return np.nan_to_num(val, nan=0.0, posinf=0.0, neginf=0.0)

    def _gauss_second_2d(self, j1, j2, u):
        rho = self.corr[0, 1]
        z = special.ndtri(u)
        s2 = (1.0 - rho) * (1.0 + rho)
        if j1 != j2:
            q = rho * rho * (z[..., 0] ** 2 + z[..., 1] ** 2) - 2.0 * rho * z[..., 0] * z[..., 1]
            return np.exp(-q / (2.0 * s2)) / np.sqrt(s2)
        k = 1 - j1
        s = np.sqrt(s2)
        w = (z[..., k] - rho * z[..., j1]) / s
        return stats.norm.pdf(w) * (-rho / s) / stats.norm.pdf(z[..., j1])

    def _fd_second(self, j1, j2, u):
        h = _fd_step(u[..., j2])
        up = u.copy()
        dn = u.copy()
        up[..., j2] = np.minimum(u[..., j2] + h, 1.0 - 1e-12)
        dn[..., j2] = np.maximum(u[..., j2] - h, 1e-12)
        span = up[..., j2] - dn[..., j2]
        if j1 == j2:
            return (self.partial(j1, up) - self.partial(j1, dn)) / span
        return (self.partial(j1, up) - self.partial(j1, dn)) / span

    def fd_partial(self, j, u):
        """Central finite-difference partial of the cdf, used as a fallback and oracle."""
        u = as_points(u, self.d)
        j = self._check_index(j)
        h = _fd_step(u[..., j])
        up = u.copy()
        dn = u.copy()
        up[..., j] = np.minimum(u[..., j] + h, 1.0)
        dn[..., j] = np.maximum(u[..., j] - h, 0.0)
        val = (self.cdf(up) - self.cdf(dn)) / (up[..., j] - dn[..., j])
        return np.clip(val, 0.0, 1.0)

    def density(self, u):
        """Copula density for d = 2, i.e. the mixed second partial."""
        if self.d != 2:
            raise InvalidArgumentError("density is only exposed for d = 2")
        return self.second_partial(0, 1, u)

    # -- sampling ---------------------------------------------------------

    def sample(self, n, rng):
        """Draw ``n`` i.i.d. points with this copula from a numpy Generator."""
        n = int(n)
        if n < 1:
            raise InvalidArgumentError("n must be at least 1")
        d = self.d
        fam = self.family
        if fam == "independence":
            return rng.random((n, d))
        if fam == "gaussian":
            L = np.linalg.cholesky(self.corr)
            z = rng.standard_normal((n, d)) @ L.T
            return special.ndtr(z)
        if fam == "clayton":
            th = self.theta
            v = rng.gamma(1.0 / th, 1.0, size=(n, 1))
            e = rng.standard_exponential((n, d))
            return (1.0 + e / v) ** (-1.0 / th)
        th = self.theta
        e = rng.standard_exponential((n, d))
        if th == 1.0:
            return np.exp(-e)
        alpha = 1.0 / th
        phi = rng.uniform(0.0, np.pi, size=(n, 1))
        w = rng.standard_exponential((n, 1))
        # positive alpha-stable frailty with Laplace transform exp(-s^alpha)
        v = (np.sin(alpha * phi) / np.sin(phi) ** (1.0 / alpha)
             * (np.sin((1.0 - alpha) * phi) / w) ** ((1.0 - alpha) / alpha))
        return np.exp(-(e / v) ** alpha)

    # -- extreme-value representation -------------------------------------

    def pickands(self, w):
        """Pickands dependence function at simplex points.

        ``w`` holds the free coordinates ``w_1..w_{d-1}`` (shape (..., d-1)),
        or the full barycentric vector (shape (..., d)) summing to one.
        """
        if not self.is_extreme_value:
            raise InvalidArgumentError(f"{self.family} is not an extreme-value copula")
        full = simplex_full(w, self.d)
        if self.family == "independence":
            return np.ones(full.shape[:-1])
        th = self.theta
        return np.sum(full ** th, axis=-1) ** (1.0 / th)

    def _check_index(self, j):
        j = int(j)
        if not 0 <= j < self.d:
            raise InvalidArgumentError(f"coordinate index {j} out of range for d={self.d}")
        return j


def _check_correlation(R):
    if not np.allclose(R, R.T) or not np.allclose(np.diag(R), 1.0):
        raise InvalidArgumentError("correlation matrix must be symmetric with unit diagonal")
    try:
        np.linalg.cholesky(R)
    except np.linalg.LinAlgError:
        raise InvalidArgumentError("correlation matrix is not positive definite") from None


def simplex_full(w, d, tol=1e-12):
    """Return the full barycentric coordinates for simplex points ``w``."""
    w = np.asarray(w, dtype=float)
    if w.ndim == 0:
        w = w[None]
    if w.shape[-1] == d - 1:
        full = np.concatenate([w, 1.0 - np.sum(w, axis=-1, keepdims=True)], axis=-1)
    elif w.shape[-1] == d:
        full = w
        if np.any(np.abs(np.sum(w, axis=-1) - 1.0) > 1e-9):
            raise InvalidArgumentError("full simplex coordinates must sum to one")
    else:
        raise InvalidArgumentError("simplex point has the wrong dimension")
    if np.any(full < -tol) or np.any(np.isnan(full)):
        raise InvalidArgumentError("point lies outside the unit simplex")
    return np.clip(full, 0.0, 1.0)


# -- functional interface ------------------------------------------------


def cdf(model, u):
    return model.cdf(u)


def partial(model, j, u):
    return model.partial(j, u)


def second_partial(model, j1, j2, u):
    return model.second_partial(j1, j2, u)


def sample_iid(model, n, rng):
    return model.sample(n, rng)


def pickands_A(model, w):
    return model.pickands(w)


def check_condition_2_1(model, m=32, eps=1e-3):
    """Grid evidence for the second-derivative growth bound on ``model``.

    For every pair of coordinates the ratio of ``|C''_{j1 j2}(u)|`` to
    ``min{1/(u_j1(1-u_j1)), 1/(u_j2(1-u_j2))}`` is maximised over the lattice
    ``{eps + k(1-2eps)/m}``. The maximum is the smallest admissible constant on
    that lattice. The check passes when the constant is finite and changes by
    at most a factor of two when the lattice is refined to ``2m``.
    """
    if m < 8:
        raise InvalidArgumentError("grid resolution m must be at least 8")

    def sweep(mm):
        t = eps + np.arange(mm + 1) * (1.0 - 2.0 * eps) / mm
        grids = np.meshgrid(*([t] * model.d), indexing="ij")
        pts = np.stack(grids, axis=-1).reshape(-1, model.d)
        best, worst = 0.0, None
        for j1 in range(model.d):
            for j2 in range(j1, model.d):
                val = np.abs(model.second_partial(j1, j2, pts))
                bound = np.maximum(pts[:, j1] * (1 - pts[:, j1]), pts[:, j2] * (1 - pts[:, j2]))
                ratio = val * bound
                if not np.all(np.isfinite(ratio)):
                    return np.inf, None
                i = int(np.argmax(ratio))
                if ratio[i] > best:
                    best, worst = float(ratio[i]), (j1, j2, pts[i].tolist())
        return best, worst

    k1, worst = sweep(m)
    k2, _ = sweep(2 * m)
    finite = np.isfinite(k1) and np.isfinite(k2)
    if not finite:
        stable = False
    elif k1 == 0.0 and k2 == 0.0:
        stable = True
    else:
        stable = k1 > 0 and 0.5 <= k2 / k1 <= 2.0
    passed = bool(finite and stable)
    return {
        "K_hat": k1,
        "K_hat_refined": k2,
        "worst_point": worst,
        "pass": passed,
        "verdict": "pass (grid evidence)" if passed else "fail",
        "m": m,
        "eps": eps,
    }


_SPEC_RE = re.compile(r"^\s*([A-Za-z]+)\s*(?::\s*(.*))?$")


def parse_model(text):
    """Parse a model string such as ``gaussian:rho=0.5,d=2`` into a :class:`CopulaModel`."""
    m = _SPEC_RE.match(text or "")
    if not m:
        raise InvalidArgumentError(f"cannot parse model specification {text!r}")
    fam = _ALIASES.get(m.group(1).lower())
    if fam is None:
        raise InvalidArgumentError(f"unknown copula family {m.group(1)!r}")
    kwargs = {}
    body = (m.group(2) or "").strip()
    if body:
        for item in body.split(","):
            key, sep, value = item.partition("=")
            key = key.strip().lower()
            if not sep or key not in _KEYS[fam]:
                raise InvalidArgumentError(f"unknown key {key!r} for family {fam}")
            try:
                kwargs[key] = int(value) if key == "d" else float(value)
            except ValueError:
                raise InvalidArgumentError(f"bad value for {key!r}: {value!r}") from None
    return CopulaModel(fam, **kwargs)
