"""Monte Carlo studies, fuzz harnesses and report serialization.

Every study returns a plain-dict report with the keys ``experiment``,
``config`` (enough to rerun it), ``cells`` (per-``n`` summaries) and, for the
CSV writer, ``table`` and ``summary`` blocks. Wall-clock time is kept under
``timing`` and left out of serialized output unless asked for, so repeated
runs with one seed produce identical bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time

import numpy as np

from . import hk
from ._parallel import replicate
from ._validation import InvalidArgumentError
from .empirical import (
    WeightSpec,
    bar_C_process,
    hat_C_process,
    oscillation_modulus,
    pseudo_observations,
    weighted_alpha_sup,
    weighted_beta_sup,
    weighted_sup_distance,
)
from .rank import (
    ks_to_fitted_normal,
    parse_score,
    rank_autocorrelation,
    rank_statistic,
    score_mean,
    sigma2_iid,
)
from .rng import check_seed, stream
from .simulation import generate, generate_series, parse_generator

try:
    from importlib.metadata import version as _pkg_version

    VERSION = _pkg_version("artifact")
except Exception:  # pragma: no cover - source checkout without install
    VERSION = "0.1.0"


def _summary(values):
    v = np.asarray(values, dtype=float)
    q10, q50, q90 = np.quantile(v, [0.1, 0.5, 0.9])
    return {"median": float(q50), "mean": float(v.mean()), "q10": float(q10), "q90": float(q90)}


def _report(experiment, config, cells, table=None, summary=None, **extra):
    out = {"experiment": experiment, "config": config, "cells": cells, "version": VERSION}
    if table is not None:
        out["table"] = table
    if summary is not None:
        out["summary"] = summary
    out.update(extra)
    return out


def _check_ladder(ns, reps, min_reps):
    ns = [int(n) for n in ns]
    if len(ns) < 2:
        raise InvalidArgumentError("the n ladder needs at least two values")
    if any(n < 2 for n in ns):
        raise InvalidArgumentError("sample sizes must be at least 2")
    if int(reps) < min_reps:
        raise InvalidArgumentError(f"reps must be at least {min_reps}")
    return ns, int(reps)


# -- weighted distance ----------------------------------------------------


def check_omega(omega):
    omega = float(omega)
    if omega == 0.0 or 0.0 < omega < 0.5:
        return omega
    raise InvalidArgumentError(
        f"omega={omega!r} is outside (0, 1/2); the weighted convergence result only "
        "covers 0 < omega < 1/2 (omega = 0 runs the unweighted baseline)"
    )


def wdist_replicate(gen, n, omega, c, m, rng, variant="g"):
    """One weighted sup distance between the copula process and its linearisation."""
    model = gen.stationary_model()
    x, latent = generate(gen, n, rng)
    p = pseudo_observations(x)
    return weighted_sup_distance(
        lambda pts: hat_C_process(p, model, pts),
        lambda pts: bar_C_process(latent, model, pts),
        WeightSpec(omega, variant), c, n, m, jump_points=p,
    )


def run_wdist_study(generator, ns, reps, omega=0.25, c=0.5, m=128, seed=0,
                    threads=1, variant="g"):
    """Medians of the weighted sup distance along a sample-size ladder."""
    t0 = time.perf_counter()
    ns, reps = _check_ladder(ns, reps, 50)
    omega = check_omega(omega)
    seed = check_seed(seed)
    gen = parse_generator(generator) if isinstance(generator, str) else generator
    if gen.stationary_model() is None:
        raise InvalidArgumentError("the generator needs a known multivariate copula")
    cells, rows = [], []
    for k, n in enumerate(ns):
        dist = replicate(
            lambda r, n=n, k=k: wdist_replicate(gen, n, omega, c, m, stream(seed, k, r), variant),
            reps, threads)
        cells.append({"n": n, **_summary(dist)})
        rows.extend([n, r, dv] for r, dv in enumerate(dist))
    config = {"generator": gen.describe(), "ns": ns, "reps": reps, "omega": omega,
              "c": c, "m": m, "seed": seed, "variant": variant}
    return _report(
        "wdist", config, cells,
        table={"columns": ["n", "rep", "distance"], "rows": rows},
        summary=_cells_table(cells, ["n", "median", "mean", "q10", "q90"]),
        timing={"seconds": time.perf_counter() - t0},
    )


def _cells_table(cells, cols):
    return {"columns": cols, "rows": [[c[k] for k in cols] for c in cells]}


# -- conditions -----------------------------------------------------------


def run_conditions_diagnostics(generator, ns, reps, omega=0.25, lam=0.5, theta3=1.0,
                               mu=0.3, delta_exp=0.25, m=32, seed=0, threads=1, slack=0.10):
    """Empirical sweeps of the oscillation and weighted-marginal conditions.

    For every ``n``: the oscillation modulus ``M_n(n^-delta_exp, mu)`` of the
    latent empirical process, and the two weighted marginal suprema (of the
    uniform empirical process and of the quantile process over the window
    ``(n^-lam, 1 - n^-lam)``), each maximised over the margins.
    """
    t0 = time.perf_counter()
    ns, reps = _check_ladder(ns, reps, 50)
    if not 0.0 < omega < 0.5:
        raise InvalidArgumentError("omega must lie in (0, 1/2)")
    if not 0.0 < lam < theta3:
        raise InvalidArgumentError(f"window exponent lambda={lam!r} must lie in (0, theta3={theta3!r})")
    seed = check_seed(seed)
    gen = parse_generator(generator) if isinstance(generator, str) else generator
    model = gen.stationary_model()
    if model is None:
        raise InvalidArgumentError("the generator needs a known multivariate copula")

    def one(r, n, k):
        _, latent = generate(gen, n, stream(seed, k, r))
        u = latent.values
        d = u.shape[1]
        return (
            oscillation_modulus(u, model, n ** (-delta_exp), mu, m),
            max(weighted_alpha_sup(u, j, omega) for j in range(d)),
            max(weighted_beta_sup(u, j, omega, lam, theta3) for j in range(d)),
        )

    cells, rows = [], []
    for k, n in enumerate(ns):
        res = np.array(replicate(lambda r, n=n, k=k: one(r, n, k), reps, threads))
        cell = {"n": n}
        for i, key in enumerate(("modulus", "alpha_sup", "beta_sup")):
            cell.update({f"{key}_{s}": v for s, v in _summary(res[:, i]).items()})
        cells.append(cell)
        rows.extend([n, r, *map(float, res[r])] for r in range(reps))

    med = {key: [c[f"{key}_median"] for c in cells] for key in ("modulus", "alpha_sup", "beta_sup")}
    trends = {
        "modulus_strictly_decreasing": bool(all(b < a for a, b in zip(med["modulus"], med["modulus"][1:]))),
        "alpha_sup_envelope_nonincreasing": _envelope_ok(med["alpha_sup"], slack),
        "beta_sup_envelope_nonincreasing": _envelope_ok(med["beta_sup"], slack),
    }
    config = {"generator": gen.describe(), "ns": ns, "reps": reps, "omega": omega, "lam": lam,
              "theta3": theta3, "mu": mu, "delta_exp": delta_exp, "m": m, "seed": seed,
              "slack": slack}
    cols = ["n", "modulus_median", "alpha_sup_median", "beta_sup_median"]
    return _report(
        "conditions", config, cells,
        table={"columns": ["n", "rep", "modulus", "alpha_sup", "beta_sup"], "rows": rows},
        summary=_cells_table(cells, cols), trends=trends,
        timing={"seconds": time.perf_counter() - t0},
    )


def _envelope_ok(medians, slack):
    """Each median is at most ``1 + slack`` times the running maximum before it."""
    env = np.maximum.accumulate(np.asarray(medians, dtype=float))
    return bool(np.all(np.asarray(medians[1:]) <= (1.0 + slack) * env[:-1]))


# -- grid calculus fuzzing ------------------------------------------------


def random_grid_function(rng, max_size=16, sparse=None):
    """Random right-continuous grid function with up to ``max_size`` knots per axis.

    About half the draws use sparse integer atoms, so that exact ties and
    shared atoms between two functions on one grid show up regularly.
    """
    kx = int(rng.integers(1, max_size + 1))
    ky = int(rng.integers(1, max_size + 1))
    x = np.sort(rng.choice(np.arange(64), size=kx, replace=False)) / 8.0
    y = np.sort(rng.choice(np.arange(64), size=ky, replace=False)) / 8.0
    if sparse is None:
        sparse = bool(rng.integers(2))
    if sparse:
        atoms = rng.integers(-2, 3, size=(kx, ky)) * (rng.random((kx, ky)) < 0.4)
    else:
        atoms = rng.standard_normal((kx, ky))
    return hk.GridFunction2D(x, y, np.cumsum(np.cumsum(atoms, 0), 1))


def random_grid_pair(rng, max_size=16):
    """Two grid functions on one knot grid, plus a knot rectangle ``(c, d]``."""
    f = random_grid_function(rng, max_size)
    shape = f.shape
    if rng.integers(4) == 0:
        # atoms of g only where f has atoms
        mask = hk._cell_atoms(f.values) != 0
        ga = mask * rng.integers(-2, 3, size=shape)
    elif rng.integers(2):
        ga = rng.integers(-2, 3, size=shape) * (rng.random(shape) < 0.4)
    else:
        ga = rng.standard_normal(shape)
    g = hk.GridFunction2D(f.x, f.y, np.cumsum(np.cumsum(ga, 0), 1))
    rect = None
    if f.x.size >= 2 and f.y.size >= 2:
        i = np.sort(rng.choice(f.x.size, 2, replace=False))
        j = np.sort(rng.choice(f.y.size, 2, replace=False))
        rect = ((f.x[i[0]], f.y[j[0]]), (f.x[i[1]], f.y[j[1]]))
    return f, g, rect


def jordan_errors(f):
    """Reconstruction and additivity errors of the Jordan decomposition of ``f``."""
    a = (f.x[0], f.y[0])
    b = (f.x[-1], f.y[-1])
    fp, fm = hk.jordan_decompose(f)
    recon = float(np.max(np.abs(f.values[0, 0] + fp.values - fm.values - f.values)))
    v = hk.hk_variation(f, a, b, a)
    vp = hk.hk_variation(fp, a, b, a)
    vm = hk.hk_variation(fm, a, b, a)
    return recon, abs(v - vp - vm)


def run_hk_fuzz(cases=500, max_size=16, seed=0):
    """Fuzz integration by parts and the Jordan decomposition on random grids."""
    if int(cases) < 1:
        raise InvalidArgumentError("cases must be positive")
    if not 1 <= int(max_size) <= 16:
        raise InvalidArgumentError("grid sizes are limited to 16 knots per axis")
    seed = check_seed(seed)
    t0 = time.perf_counter()
    ibp_max = recon_max = add_max = 0.0
    degenerate = 0
    for r in range(int(cases)):
        rng = stream(seed, r)
        f, g, rect = random_grid_pair(rng, int(max_size))
        if rect is None:
            degenerate += 1
        else:
            ibp_max = max(ibp_max, hk.integration_by_parts(f, g, *rect)["residual"])
        rec, add = jordan_errors(f)
        recon_max, add_max = max(recon_max, rec), max(add_max, add)
    cells = [{"ibp_max_residual": ibp_max, "jordan_max_reconstruction_error": recon_max,
              "vhk_max_additivity_error": add_max, "degenerate_cases": degenerate}]
    return _report("hk-fuzz", {"cases": int(cases), "max_size": int(max_size), "seed": seed},
                   cells, summary=_cells_table(cells, list(cells[0])),
                   timing={"seconds": time.perf_counter() - t0})


# -- rank statistic CLT ---------------------------------------------------


def clt_study(generator, score, n, reps, seed=0, threads=1, with_sigma2=None):
    """Monte Carlo law of ``sqrt(n) (R_n - E J)``.

    Reports the mean, the variance, the Kolmogorov-Smirnov distance to the
    fitted normal and, for i.i.d. generators, the quadrature variance.
    """
    t0 = time.perf_counter()
    if int(reps) < 100:
        raise InvalidArgumentError("reps must be at least 100")
    n, reps, seed = int(n), int(reps), check_seed(seed)
    gen = parse_generator(generator) if isinstance(generator, str) else generator
    J = parse_score(score) if isinstance(score, str) else score
    model = gen.stationary_model()
    if model is None or model.d != 2:
        raise InvalidArgumentError("the CLT study needs a bivariate generator")
    mu = score_mean(model, J)

    def one(r):
        x, _ = generate(gen, n, stream(seed, r))
        return math.sqrt(n) * (rank_statistic(x, J) - mu)

    vals = np.array(replicate(one, reps, threads))
    cell = {"n": n, "mean": float(vals.mean()), "variance": float(vals.var(ddof=1)),
            "ks_distance": ks_to_fitted_normal(vals), "score_mean": mu}
    if with_sigma2 is None:
        with_sigma2 = gen.kind == "iid"
    if with_sigma2:
        cell["sigma2_quadrature"] = sigma2_iid(model, J)
    config = {"generator": gen.describe(), "score": J.name, "n": n, "reps": reps, "seed": seed}
    return _report("rank-clt", config, [cell],
                   table={"columns": ["rep", "statistic"], "rows": [[r, v] for r, v in enumerate(vals)]},
                   summary=_cells_table([cell], list(cell)),
                   timing={"seconds": time.perf_counter() - t0})


def autocorr_study(a, k, score, ns, reps, seed=0, threads=1):
    """Monte Carlo law of ``sqrt(n) (r_k - E J)`` for a Gaussian AR(1) series."""
    t0 = time.perf_counter()
    if int(reps) < 100:
        raise InvalidArgumentError("reps must be at least 100")
    ns = [int(n) for n in ns]
    seed = check_seed(seed)
    J = parse_score(score) if isinstance(score, str) else score
    if J.factors is None:
        raise InvalidArgumentError(f"score {J.name!r} is not a product of univariate scores")
    gen = parse_generator(f"lag:a={float(a)!r},k={int(k)}")
    mu = score_mean(gen.stationary_model(), J)
    cells, rows = [], []
    for idx, n in enumerate(ns):
        def one(r, n=n, idx=idx):
            y = generate_series(a, n, stream(seed, idx, r))
            return math.sqrt(n) * (rank_autocorrelation(y, k, *J.factors) - mu)

        vals = np.array(replicate(one, int(reps), threads))
        cells.append({"n": n, "mean": float(vals.mean()), "variance": float(vals.var(ddof=1)),
                      "ks_distance": ks_to_fitted_normal(vals), "score_mean": mu})
        rows.extend([n, r, v] for r, v in enumerate(vals))
    config = {"a": float(a), "k": int(k), "score": J.name, "ns": ns, "reps": int(reps), "seed": seed}
    return _report("autocorr", config, cells,
                   table={"columns": ["n", "rep", "statistic"], "rows": rows},
                   summary=_cells_table(cells, ["n", "mean", "variance", "ks_distance"]),
                   timing={"seconds": time.perf_counter() - t0})


# -- serialization --------------------------------------------------------


def fmt_float(x):
    """Render a float with 17 significant digits (round-trip exact)."""
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def _to_json(obj):
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ",".join(json.dumps(k) + ":" + _to_json(v) for k, v in items) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ",".join(_to_json(v) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj)
    return json.dumps(str(obj))


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    return str(v)


def render(report, fmt="json", timing=False):
    """Serialize a report to a string; keys sorted, floats at 17 digits."""
    if not timing:
        report = {k: v for k, v in report.items() if k != "timing"}
    if fmt == "json":
        return _to_json(report) + "\n"
    if fmt != "csv":
        raise InvalidArgumentError(f"unknown format {fmt!r}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    blocks = [report[k] for k in ("table", "summary") if k in report]
    if not blocks:
        blocks = [_cells_table(report["cells"], sorted(report["cells"][0]))] if report.get("cells") else []
    for i, block in enumerate(blocks):
        if i:
            buf.write("\n")
        w.writerow(block["columns"])
        for row in block["rows"]:
            w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def emit(report, fmt="json", path=None, timing=False):
    """Write a report to ``path`` (stdout when ``None``); returns the text.

    Raises ``OSError`` when the path cannot be written.
    """
    text = render(report, fmt, timing)
    if path is None or path == "-":
        import sys

        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text
