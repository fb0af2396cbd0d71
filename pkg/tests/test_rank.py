import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from copulaproc import InvalidArgumentError, QuadratureError
from copulaproc.copulas import CopulaModel
from copulaproc.experiments import clt_study
from copulaproc.rank import (
    RankStatistic,
    ScoreFunction,
    ks_to_fitted_normal,
    parse_score,
    rank_autocorrelation,
    rank_statistic,
    rank_statistic_ls,
    score_admissibility,
    score_constant,
    score_gaussian_pml,
    score_mean,
    score_product,
    score_vdw,
    score_wilcoxon,
    sigma2_iid,
)
from copulaproc.rng import stream

INDEP = CopulaModel("independence")


def probit_oracle(u):
    """Normal quantile via mpmath's inverse error function at 40 digits."""
    with mpmath.workdps(40):
        return float(mpmath.sqrt(2) * mpmath.erfinv(2 * mpmath.mpf(u) - 1))


def test_score_examples():
    assert score_vdw()(0.5, 0.5) == 0.0
    assert np.all(score_wilcoxon()(0.5, np.linspace(0.01, 0.99, 9)) == 0.0)
    q = probit_oracle(0.8413)
    assert score_vdw()(0.8413, 0.8413) == pytest.approx(q * q, rel=1e-13)
    assert score_vdw()(0.8413, 0.8413) == pytest.approx(1.0, abs=1e-3)


def test_quantile_accuracy():
    u = np.concatenate([np.logspace(-15, -1, 30), np.linspace(0.1, 0.9, 17)])
    for x in u:
        assert special.ndtri(x) == pytest.approx(probit_oracle(x), rel=1e-13)
    assert np.max(np.abs(special.ndtr(special.ndtri(u)) - u)) < 1e-14


@pytest.mark.parametrize("J", [score_vdw(), score_wilcoxon(), score_gaussian_pml(0.5),
                               score_gaussian_pml(-0.3), score_product()], ids=lambda s: s.name)
def test_analytic_derivatives_match_fd(J):
    r = stream(1)
    u, v = r.uniform(0.02, 0.98, size=(2, 1000))
    h = 1e-6
    d1 = (J(u + h, v) - J(u - h, v)) / (2 * h)
    d2 = (J(u, v + h) - J(u, v - h)) / (2 * h)
    assert np.allclose(J.d1(u, v), d1, atol=1e-5, rtol=1e-6)
    assert np.allclose(J.d2(u, v), d2, atol=1e-5, rtol=1e-6)
    h = 1e-4
    d12 = (J.d1(u, v + h) - J.d1(u, v - h)) / (2 * h)
    assert np.allclose(J.d12(u, v), d12, atol=1e-5, rtol=1e-5)


def test_pml_score_is_likelihood_derivative():
    theta = 0.4
    u, v = stream(2).uniform(0.05, 0.95, size=(2, 200))

    def logc(t):
        return np.log(CopulaModel("gaussian", rho=t).density(np.column_stack([u, v])))

    h = 1e-6
    fd = (logc(theta + h) - logc(theta - h)) / (2 * h)
    assert np.allclose(score_gaussian_pml(theta)(u, v), fd, atol=1e-6)
    with pytest.raises(InvalidArgumentError):
        score_gaussian_pml(1.0)


def test_parse_score():
    assert parse_score("vdw").name == "vdw"
    assert parse_score("Wilcoxon").name == "wilcoxon"
    assert parse_score("pml-gauss:theta=0.5")(0.3, 0.6) == score_gaussian_pml(0.5)(0.3, 0.6)
    for bad in ["spearman", "pml-gauss", "vdw:theta=1", "pml-gauss:theta=x"]:
        with pytest.raises(InvalidArgumentError):
            parse_score(bad)


def test_rank_statistic_examples():
    x = stream(3).standard_normal((30, 2))
    assert rank_statistic(x, score_constant(1.0)) == pytest.approx(1.0)
    val = rank_statistic(np.array([[1.0, 1.0], [2.0, 2.0]]), score_wilcoxon())
    assert val == pytest.approx(math.log(2) / 6, rel=1e-14)
    with pytest.raises(InvalidArgumentError):
        rank_statistic(np.zeros((0, 2)), score_vdw())


def test_rank_statistic_ls_equals_direct():
    r = stream(4)
    for k in range(100):
        n = int(r.integers(1, 101))
        x = r.standard_normal((n, 2))
        if k % 4 == 0:
            x = np.round(x, 1)  # ties
        for J in (score_vdw(), score_wilcoxon()):
            assert rank_statistic_ls(x, J) == pytest.approx(rank_statistic(x, J), abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 80), st.integers(0, 2**32 - 1))
def test_rank_statistic_invariance(n, seed):
    x = np.random.default_rng(seed).standard_normal((n, 2))
    J = score_vdw()
    assert rank_statistic(x, J) == rank_statistic(np.exp(x) * 3 + 1, J)


def test_rank_autocorrelation_examples():
    y = np.array([1.0, 2.0, 3.0, 4.0])
    one = lambda t: np.ones_like(t)  # noqa: E731
    assert rank_autocorrelation(y, 1, one, one) == 1.0
    q = probit_oracle
    expected = sum(q(i / 5) * q((i - 1) / 5) for i in range(2, 5)) / 3
    assert rank_autocorrelation(y, 1, special.ndtri, special.ndtri) == pytest.approx(expected, rel=1e-13)
    w = score_wilcoxon().factors
    assert rank_autocorrelation(np.arange(20.0), 1, *w) > 0
    for k in (0, 4):
        with pytest.raises(InvalidArgumentError):
            rank_autocorrelation(y, k, one, one)


def test_score_mean():
    assert score_mean(INDEP, score_vdw()) == pytest.approx(0.0, abs=1e-12)
    assert score_mean(INDEP, score_wilcoxon()) == pytest.approx(0.0, abs=1e-12)
    assert score_mean(CopulaModel("gaussian", rho=0.3), score_vdw()) == pytest.approx(0.3, abs=1e-8)


def test_sigma2_closed_forms():
    assert sigma2_iid(INDEP, score_constant(2.0)) == 0.0
    assert sigma2_iid(INDEP, score_product()) == pytest.approx(1.0 / 144.0, rel=1e-8)
    assert sigma2_iid(INDEP, score_vdw()) == pytest.approx(1.0, rel=1e-6)
    # the vdW statistic estimates rho; its rank-based variance is (1 - rho^2)^2
    assert sigma2_iid(CopulaModel("gaussian", rho=0.5), score_vdw()) == pytest.approx(0.5625, rel=1e-6)


def test_sigma2_requires_density():
    J = ScoreFunction("nod12", J=lambda u, v: u * v)
    with pytest.raises(InvalidArgumentError):
        sigma2_iid(INDEP, J)


def test_sigma2_nonconvergence_reports():
    with pytest.raises(QuadratureError) as exc:
        sigma2_iid(INDEP, score_vdw(), rtol=0.0, atol=0.0, order=2, max_order=4)
    assert "history" in exc.value.diagnostics


def _mc_variance(J, n, reps, seed, mean):
    vals = np.array([math.sqrt(n) * (rank_statistic(INDEP.sample(n, stream(seed, r)), J) - mean)
                     for r in range(reps)])
    return vals.var(ddof=1), vals


@pytest.mark.slow
def test_sigma2_product_against_monte_carlo():
    var, vals = _mc_variance(score_product(), 2000, 5000, 10, 0.25)
    s2 = sigma2_iid(INDEP, score_product())
    # standard error of a sample variance: sqrt((m4 - s^4) / reps)
    se = math.sqrt((np.mean((vals - vals.mean()) ** 4) - var ** 2) / len(vals))
    assert abs(var - s2) < 3 * se


@pytest.mark.slow
def test_sigma2_vdw_against_monte_carlo():
    var, _ = _mc_variance(score_vdw(), 2000, 5000, 11, 0.0)
    assert abs(var - sigma2_iid(INDEP, score_vdw())) < 0.1


def test_admissibility_examples():
    assert score_admissibility(score_vdw(), 0.25)["pass"]
    assert score_admissibility(score_wilcoxon(), 0.25)["pass"]
    inv = ScoreFunction("inv-u", J=lambda u, v: 1.0 / u + 0.0 * v)
    rep = score_admissibility(inv, 0.25)
    assert not rep["growth_pass"] and not rep["pass"]
    with pytest.raises(InvalidArgumentError):
        score_admissibility(score_vdw(), 0.25, deltas=[0.01, 0.05])


def test_clt_study_gaussian():
    rep = clt_study("iid:gaussian:rho=0.3", "vdw", 1000, 1000, seed=5)
    cell = rep["cells"][0]
    assert cell["ks_distance"] < 0.05
    assert cell["score_mean"] == pytest.approx(0.3, abs=1e-8)
    with pytest.raises(InvalidArgumentError):
        clt_study("iid:indep", "vdw", 100, 10)


def test_ks_helper():
    assert ks_to_fitted_normal(np.ones(5)) == 1.0
    assert ks_to_fitted_normal(stream(6).standard_normal(4000)) < 0.03


def test_rank_statistic_estimator():
    x = stream(7).standard_normal((100, 2))
    est = RankStatistic(score="wilcoxon").fit(x)
    assert est.statistic_ == rank_statistic(x, score_wilcoxon())
    assert est.standardized() == pytest.approx(10 * est.statistic_)
    assert est.get_params() == {"score": "wilcoxon"}
