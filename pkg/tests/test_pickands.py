import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from copulaproc import InvalidArgumentError
from copulaproc.copulas import CopulaModel, simplex_full
from copulaproc.empirical import pseudo_observations
from copulaproc.pickands import (
    PickandsEstimator,
    b_process,
    b_process_quadrature,
    pickands_estimate,
    pickands_study,
    simplex_grid,
)
from copulaproc.rng import stream
from copulaproc.simulation import parse_generator

INDEP = CopulaModel("independence")
E1 = np.exp(-1.0)


def gumbel_pobs(theta, n, *keys):
    g = CopulaModel("gumbel", theta=theta)
    return g, pseudo_observations(g.sample(n, stream(*keys)))


def test_single_observation_examples():
    assert pickands_estimate(np.array([[E1, E1]]), [0.5, 0.5]) == pytest.approx(0.5)
    assert pickands_estimate(np.array([[E1, np.exp(-2.0)]]), [1.0, 0.0]) == pytest.approx(1.0)
    assert b_process(np.array([[E1, E1]]), INDEP, [0.5, 0.5]) == pytest.approx(1.0)


def test_all_zero_weights_rejected():
    with pytest.raises(InvalidArgumentError):
        pickands_estimate(np.array([[E1, E1]]), [0.0, 0.0])


def test_boundary_w_rejected_for_b_process():
    with pytest.raises(InvalidArgumentError):
        b_process(np.array([[E1, E1]]), INDEP, [1.0])


def test_model_hook_gives_zero():
    g = CopulaModel("gumbel", theta=2.0)
    assert abs(b_process(g, g, [0.3], n=500)) < 1e-8


@pytest.mark.parametrize("theta", [1.5, 2.0, 3.0])
def test_exact_identity(theta):
    w = (np.arange(1, 10) / 10)[:, None]
    for k in range(10):
        g, p = gumbel_pobs(theta, int(stream(int(theta * 10), k).integers(5, 400)), int(theta * 10), k)
        n = p.n
        lhs = 1.0 / pickands_estimate(p, w) - 1.0 / g.pickands(simplex_full(w, 2))
        assert np.max(np.abs(lhs - b_process(p, g, w) / np.sqrt(n))) < 1e-10


def test_quadrature_cross_check():
    g, p = gumbel_pobs(2.0, 60, 3)
    for t in (0.2, 0.5, 0.85):
        exact = b_process(p, g, [t])
        assert b_process_quadrature(p, g, [t]) == pytest.approx(exact, rel=1e-6)


def test_rank_invariance():
    g = CopulaModel("gumbel", theta=2.0)
    x = g.sample(200, stream(4))
    w = simplex_grid(11)
    a = pickands_estimate(pseudo_observations(x), w)
    b = pickands_estimate(pseudo_observations(np.log(x) * 2 + 5), w)
    assert np.array_equal(a, b)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 300), st.integers(0, 2**32 - 1))
def test_estimate_positive_and_clip_bounds(n, seed):
    x = np.random.default_rng(seed).standard_normal((n, 2))
    p = pseudo_observations(x)
    w = simplex_grid(21)
    est = pickands_estimate(p, w)
    assert np.all(est > 0)
    c = pickands_estimate(p, w, clip=True)
    full = simplex_full(w, 2)
    assert np.all(c >= full.max(axis=1)) and np.all(c <= 1.0)


def test_endpoint_convention():
    # at t = 1 only the first margin is active: reciprocal mean of -log U_i1
    p = pseudo_observations(stream(5).standard_normal((50, 2)))
    expected = 1.0 / np.mean(-np.log(p.values[:, 0]))
    assert pickands_estimate(p, [1.0]) == pytest.approx(expected)


def test_trivariate_estimate():
    g = CopulaModel("gumbel", d=3, theta=2.0)
    p = pseudo_observations(g.sample(5000, stream(6)))
    w = np.array([[0.2, 0.3], [1 / 3, 1 / 3]])
    assert np.allclose(pickands_estimate(p, w), g.pickands(w), atol=0.05)


def test_permutation_symmetry_in_distribution():
    g = CopulaModel("gumbel", theta=2.0)
    t = np.array([[0.2], [0.8]])
    vals = np.array([pickands_estimate(pseudo_observations(g.sample(300, stream(7, r))), t)
                     for r in range(300)])
    diff = vals[:, 0] - vals[:, 1]
    assert abs(diff.mean()) < 3 * diff.std(ddof=1) / np.sqrt(len(diff))


def test_independence_large_n_within_band():
    rep = pickands_study(parse_generator("iid:indep"), INDEP, [5000], 100, [[0.5]], seed=8)
    errs = np.array(rep["cells"][0]["errors"])
    one = pickands_estimate(pseudo_observations(INDEP.sample(5000, stream(9))), [0.5])
    assert abs(one - 1.0) <= np.quantile(errs, 0.995) + 1e-12


def test_study_decreasing_independence():
    rep = pickands_study(parse_generator("iid:indep"), INDEP, [200, 2000], 100, simplex_grid(11), seed=10)
    med = [c["median"] for c in rep["cells"]]
    assert np.all(np.isfinite(med)) and med[1] < med[0]


def test_estimator_api():
    g, _ = gumbel_pobs(2.0, 10, 0)
    x = g.sample(400, stream(11))
    est = PickandsEstimator(clip=True).fit(x)
    w = simplex_grid(5)
    assert np.array_equal(est.predict(w), pickands_estimate(pseudo_observations(x), w, clip=True))
    assert np.allclose(est.b_process(w[1:-1], g), b_process(pseudo_observations(x), g, w[1:-1]))
