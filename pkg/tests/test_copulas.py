import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from copulaproc import DomainError, InvalidArgumentError
from copulaproc.copulas import (
    CopulaModel,
    bvn_cdf,
    check_condition_2_1,
    parse_model,
    simplex_full,
)
from copulaproc.rng import stream


def test_independence_cdf():
    assert CopulaModel("independence").cdf([0.3, 0.4]) == pytest.approx(0.12, abs=1e-15)


def test_uniform_margins(family):
    assert family.cdf([0.7, 1.0]) == pytest.approx(0.7, abs=1e-12)
    assert family.cdf([1.0, 0.7]) == pytest.approx(0.7, abs=1e-12)
    assert family.cdf([0.0, 0.4]) == 0.0


def test_gumbel_cdf_closed_form():
    # exp(-(2 log^2 2)^(1/2)) = exp(-sqrt(2) log 2) = 2^(-sqrt 2)
    val = CopulaModel("gumbel", theta=2.0).cdf([0.5, 0.5])
    assert val == pytest.approx(2.0 ** -np.sqrt(2.0), rel=1e-14)
    assert val == pytest.approx(0.375214, abs=1e-6)


def test_gaussian_cdf_against_numerical_integration():
    rho = 0.5
    m = CopulaModel("gaussian", rho=rho)
    z = stats.norm.ppf([0.3, 0.6])
    dens = lambda y, x: stats.multivariate_normal(cov=[[1, rho], [rho, 1]]).pdf([x, y])  # noqa: E731
    ref, _ = integrate.dblquad(dens, -12, z[0], -12, z[1], epsabs=1e-12)
    assert m.cdf([0.3, 0.6]) == pytest.approx(ref, abs=1e-9)


def test_bvn_limits():
    assert bvn_cdf(np.inf, 0.3, 0.4) == pytest.approx(stats.norm.cdf(0.3))
    assert bvn_cdf(-np.inf, 0.3, 0.4) == 0.0
    assert bvn_cdf(0.0, 0.0, 0.0) == pytest.approx(0.25)


def test_partials_examples():
    assert CopulaModel("independence").partial(0, [0.3, 0.4]) == pytest.approx(0.4)
    assert CopulaModel("gaussian", rho=0.0).partial(1, [0.6, 0.25]) == pytest.approx(0.6)
    # (1/u + 1/v - 1)^-2 / u^2 at (1/2, 1/2) = (1/3)^2 * 4 = 4/9
    assert CopulaModel("clayton", theta=1.0).partial(0, [0.5, 0.5]) == pytest.approx(4.0 / 9.0)


def test_partial_boundary_is_domain_error(family):
    with pytest.raises(DomainError):
        family.partial(0, [0.0, 0.5])
    with pytest.raises(DomainError):
        family.partial(1, [0.5, 1.0])


def test_partials_match_finite_differences(family):
    u = stream(1, 0).uniform(0.02, 0.98, size=(1000, 2))
    for j in range(2):
        an = family.partial(j, u)
        h = 1e-6
        up, dn = u.copy(), u.copy()
        up[:, j] += h
        dn[:, j] -= h
        fd = (family.cdf(up) - family.cdf(dn)) / (2 * h)
        assert np.max(np.abs(an - fd)) < 1e-5
        assert np.all((an >= 0) & (an <= 1))


def test_second_partial_examples():
    assert CopulaModel("independence").second_partial(0, 1, [0.3, 0.7]) == pytest.approx(1.0)
    assert CopulaModel("gaussian", rho=0.0).second_partial(0, 1, [0.2, 0.9]) == pytest.approx(1.0)
    g = CopulaModel("gumbel", theta=2.0)
    h = 1e-4
    fd = (g.cdf([0.5 + h, 0.5 + h]) - g.cdf([0.5 + h, 0.5 - h])
          - g.cdf([0.5 - h, 0.5 + h]) + g.cdf([0.5 - h, 0.5 - h])) / (4 * h * h)
    assert g.second_partial(0, 1, [0.5, 0.5]) == pytest.approx(fd, abs=1e-4)


def test_second_partials_match_nested_fd(family):
    u = stream(2).uniform(0.1, 0.9, size=(50, 2))
    h = 1e-4
    for j1, j2 in [(0, 1), (0, 0), (1, 1)]:
        an = family.second_partial(j1, j2, u)
        up, dn = u.copy(), u.copy()
        up[:, j2] += h
        dn[:, j2] -= h
        fd = (family.partial(j1, up) - family.partial(j1, dn)) / (2 * h)
        assert np.allclose(an, fd, atol=1e-5, rtol=1e-5)


def test_gaussian_3d_partial_matches_fd():
    R = np.array([[1, 0.5, 0.2], [0.5, 1, 0.3], [0.2, 0.3, 1]])
    m = CopulaModel("gaussian", d=3, corr=R)
    u = np.array([[0.3, 0.6, 0.7], [0.8, 0.2, 0.5]])
    for j in range(3):
        assert np.allclose(m.partial(j, u), m.fd_partial(j, u), atol=1e-6)


def test_two_increasing_and_lipschitz(family):
    r = stream(3)
    a = r.uniform(size=(1000, 2))
    b = r.uniform(size=(1000, 2))
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    inc = (family.cdf(hi) - family.cdf(np.column_stack([lo[:, 0], hi[:, 1]]))
           - family.cdf(np.column_stack([hi[:, 0], lo[:, 1]])) + family.cdf(lo))
    assert np.all(inc >= -1e-12)
    assert np.all(np.abs(family.cdf(a) - family.cdf(b)) <= np.abs(a - b).sum(1) + 1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(0.01, 0.99), st.sampled_from([0, 3, 5]))
def test_frechet_bounds(u, v, k):
    from conftest import FAMILIES

    c = FAMILIES[k].cdf([u, v])
    assert max(u + v - 1, 0) - 1e-12 <= c <= min(u, v) + 1e-12


def test_condition_2_1_examples():
    rep = check_condition_2_1(CopulaModel("independence"), m=32, eps=1e-3)
    assert rep["K_hat"] <= 0.25 + 1e-12 and rep["pass"]
    assert check_condition_2_1(CopulaModel("gaussian", rho=0.5), m=32, eps=1e-3)["pass"]
    rep = check_condition_2_1(CopulaModel("gumbel", theta=2.0), m=64, eps=1e-4)
    assert rep["pass"] and np.isfinite(rep["K_hat"])
    assert rep["verdict"] == "pass (grid evidence)"


def test_sampler_independence_envelope():
    u = CopulaModel("independence").sample(100_000, stream(4))
    n = u.shape[0]
    emp = np.mean(np.all(u <= 0.5, axis=1))
    assert abs(emp - 0.25) <= 3 * np.sqrt(0.25 / n)


@pytest.mark.parametrize("model,tau", [
    (CopulaModel("gaussian", rho=0.5), 1.0 / 3.0),
    (CopulaModel("clayton", theta=2.0), 0.5),      # theta / (theta + 2)
    (CopulaModel("gumbel", theta=2.0), 0.5),       # 1 - 1/theta
])
def test_sampler_kendall_tau(model, tau):
    u = model.sample(100_000, stream(5))
    assert abs(stats.kendalltau(u[:, 0], u[:, 1])[0] - tau) < 0.01


def test_sampler_cdf_agreement(family):
    u = family.sample(50_000, stream(6))
    pts = np.array([[0.2, 0.3], [0.5, 0.5], [0.8, 0.6]])
    emp = np.array([np.mean(np.all(u <= p, axis=1)) for p in pts])
    assert np.all(np.abs(emp - family.cdf(pts)) < 4 * np.sqrt(0.25 / 50_000))


def test_sampler_deterministic(family):
    a = family.sample(100, stream(7, 1))
    b = family.sample(100, stream(7, 1))
    assert a.tobytes() == b.tobytes()


def test_pickands_examples():
    assert CopulaModel("independence").pickands([0.3]) == 1.0
    g = CopulaModel("gumbel", theta=2.0)
    assert g.pickands([0.5]) == pytest.approx(np.sqrt(0.5))
    assert g.pickands([0.0]) == pytest.approx(1.0)
    assert g.pickands([1.0]) == pytest.approx(1.0)
    with pytest.raises(InvalidArgumentError):
        g.pickands([1.2])


@pytest.mark.parametrize("theta", [1.0, 1.5, 2.0, 3.0])
def test_extreme_value_representation(theta):
    g = CopulaModel("gumbel", theta=theta)
    w = stream(8).uniform(size=100)
    for u in np.arange(1, 10) / 10:
        lhs = g.cdf(np.column_stack([u ** w, u ** (1 - w)]))
        rhs = u ** g.pickands(w[:, None])
        assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_pickands_bounds_and_convexity():
    g = CopulaModel("gumbel", theta=2.5)
    t = np.linspace(0, 1, 201)
    A = g.pickands(t[:, None])
    assert np.all(A <= 1 + 1e-15) and np.all(A >= np.maximum(t, 1 - t) - 1e-15)
    r = stream(9)
    a, b = r.uniform(size=200), r.uniform(size=200)
    mid = g.pickands(((a + b) / 2)[:, None])
    assert np.all(mid <= (g.pickands(a[:, None]) + g.pickands(b[:, None])) / 2 + 1e-14)


def test_simplex_full():
    assert np.allclose(simplex_full([0.3], 2), [0.3, 0.7])
    with pytest.raises(InvalidArgumentError):
        simplex_full([0.7, 0.6], 3)


def test_parse_model():
    m = parse_model("Gaussian:RHO=0.5,d=2")
    assert m.family == "gaussian" and m.rho == 0.5
    assert parse_model("indep:d=3").d == 3
    assert parse_model("gumbel:theta=2").theta == 2.0
    with pytest.raises(InvalidArgumentError):
        parse_model("clayton:alpha=1")
    with pytest.raises(InvalidArgumentError):
        parse_model("frank:theta=1")


def test_invalid_parameters():
    with pytest.raises(InvalidArgumentError):
        CopulaModel("gaussian", rho=1.0)
    with pytest.raises(InvalidArgumentError):
        CopulaModel("gumbel", theta=0.5)
    with pytest.raises(InvalidArgumentError):
        CopulaModel("clayton", theta=-1.0)
    with pytest.raises(InvalidArgumentError):
        CopulaModel("independence").cdf([0.1, 0.2, 0.3])
