"""Seeded generators of i.i.d. and exponentially mixing samples with known copulas."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np
from scipy import signal, special

from ._validation import InvalidArgumentError, check_sample
from .copulas import CopulaModel, parse_model
from .empirical import UniformSample
from .rng import stream


@dataclass
class GeneratorSpec:
    """Description of a data-generating process.

    ``kind`` is one of

    * ``"iid"``: independent draws from ``model``;
    * ``"ar1"``: the Gaussian vector autoregression
      ``X_i = a X_{i-1} + sqrt(1 - a^2) eps_i`` with ``eps_i ~ N(0, R)``,
      started in its stationary law;
    * ``"lag"``: pairs ``(Y_i, Y_{i-k})`` of a univariate Gaussian AR(1)
      series with coefficient ``a``.
    """

    kind: str
    model: CopulaModel | None = None
    a: float = 0.0
    corr: np.ndarray | None = field(default=None, repr=False)
    k: int = 1
    text: str = ""

    def __post_init__(self):
        if self.kind not in ("iid", "ar1", "lag"):
            raise InvalidArgumentError(f"unknown generator kind {self.kind!r}")
        if self.kind == "iid" and self.model is None:
            raise InvalidArgumentError("iid generator needs a copula model")
        if self.kind in ("ar1", "lag") and not -1.0 < self.a < 1.0:
            raise InvalidArgumentError("AR coefficient a must satisfy |a| < 1")
        if self.kind == "ar1":
            R = np.atleast_2d(np.asarray(self.corr if self.corr is not None else [[1.0]], float))
            if R.shape[0] != R.shape[1] or not np.allclose(R, R.T) or not np.allclose(np.diag(R), 1):
                raise InvalidArgumentError("R must be a symmetric correlation matrix")
            try:
                np.linalg.cholesky(R)
            except np.linalg.LinAlgError:
                raise InvalidArgumentError("R is not positive definite") from None
            self.corr = R
        if self.kind == "lag" and self.k < 1:
            raise InvalidArgumentError("lag k must be at least 1")

    @property
    def d(self):
        if self.kind == "iid":
            return self.model.d
        if self.kind == "ar1":
            return self.corr.shape[0]
        return 2

    def stationary_model(self):
        """Copula of one observation (``ar1``) or of one lag pair (``lag``)."""
        if self.kind == "iid":
            return self.model
        if self.kind == "ar1":
            if self.d < 2:
                return None
            return CopulaModel("gaussian", d=self.d, corr=self.corr,
                               rho=self.corr[0, 1] if self.d == 2 else None)
        return CopulaModel("gaussian", rho=self.a ** self.k)

    def describe(self):
        return self.text or repr(self)


def _ar1(n, a, corr, rng):
    d = corr.shape[0]
    L = np.linalg.cholesky(corr)
    x0 = rng.standard_normal(d) @ L.T
    eps = rng.standard_normal((n, d)) @ L.T
    zi = (a * x0)[None, :]
    x, _ = signal.lfilter([np.sqrt(1.0 - a * a)], [1.0, -a], eps, axis=0, zi=zi)
    return x


def generate(spec, n, rng):
    """Draw ``n`` observations; returns ``(sample, latent_uniforms)``.

    The raw sample of an ``ar1`` or ``lag`` generator has standard normal
    margins and the latent uniforms are their normal cdf values. For ``iid``
    generators the raw sample is the uniform draw itself.
    """
    n = int(n)
    if n < 1:
        raise InvalidArgumentError("n must be at least 1")
    if spec.kind == "iid":
        u = spec.model.sample(n, rng)
        return u.copy(), UniformSample(u)
    if spec.kind == "ar1":
        x = _ar1(n, spec.a, spec.corr, rng)
        return x, UniformSample(special.ndtr(x))
    y = _ar1(n + spec.k, spec.a, np.eye(1), rng)[:, 0]
    x = lag_pair_sample(y, spec.k)
    return x, UniformSample(special.ndtr(x))


def generate_series(a, n, rng):
    """Univariate stationary Gaussian AR(1) path of length ``n``."""
    return _ar1(int(n), float(a), np.eye(1), rng)[:, 0]


def lag_pair_sample(series, k):
    """Rows ``(Y_i, Y_{i-k})`` for ``i = k+1, ..., n``."""
    y = np.asarray(series, dtype=float).ravel()
    k = int(k)
    if k < 1 or k >= y.size:
        raise InvalidArgumentError("lag must satisfy 1 <= k < n")
    return np.column_stack([y[k:], y[:-k]])


def simulate(spec, n, seed, rep=0):
    """Convenience wrapper drawing from the stream ``(seed, rep)``."""
    return generate(spec, n, stream(seed, rep))


_GEN_RE = re.compile(r"^\s*([A-Za-z0-9]+)\s*(?::\s*(.*))?$")


def parse_generator(text):
    """Parse ``iid:<model>``, ``ar1:a=0.6,rho=0.5,d=2`` or ``lag:a=0.6,k=1``."""
    m = _GEN_RE.match(text or "")
    if not m:
        raise InvalidArgumentError(f"cannot parse generator {text!r}")
    kind = m.group(1).lower()
    body = (m.group(2) or "").strip()
    if kind == "iid":
        return GeneratorSpec("iid", model=parse_model(body or "indep"), text=text)
    if kind not in ("ar1", "lag"):
        # a bare model string means i.i.d. draws from it
        return GeneratorSpec("iid", model=parse_model(text), text=text)
    args = {}
    for item in filter(None, (s.strip() for s in body.split(","))):
        key, sep, val = item.partition("=")
        key = key.strip().lower()
        allowed = {"a", "rho", "d"} if kind == "ar1" else {"a", "k"}
        if not sep or key not in allowed:
            raise InvalidArgumentError(f"unknown key {key!r} for generator {kind}")
        try:
            args[key] = int(val) if key in ("d", "k") else float(val)
        except ValueError:
            raise InvalidArgumentError(f"bad value for {key!r}: {val!r}") from None
    if kind == "lag":
        return GeneratorSpec("lag", a=args.get("a", 0.0), k=args.get("k", 1), text=text)
    d = args.get("d", 2)
    rho = args.get("rho", 0.0)
    R = np.full((d, d), rho)
    np.fill_diagonal(R, 1.0)
    return GeneratorSpec("ar1", a=args.get("a", 0.0), corr=R, text=text)


def check_series(series):
    return check_sample(series)[:, 0]
