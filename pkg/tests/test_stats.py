import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from h6magic.stats import (
    fit_power_law,
    fit_ramsey,
    magic_bound,
    mcmc_ci,
    normal_ci,
    ramsey_loglike,
    ramsey_model,
    syndrome_probability,
    wilson,
)

# (L, survival) at 10^4 shots per length
RAMSEY_TABLE = [(0, 0.99997), (2, 0.99986), (4, 0.9996), (6, 0.9993), (8, 0.9987)]


def ramsey_counts(shots=10_000):
    return [(L, s * shots, shots) for L, s in RAMSEY_TABLE]


def test_wilson_examples():
    ci = wilson(0, 100)
    assert ci.lo == 0.0
    assert ci.hi == pytest.approx(0.0099, abs=1e-4)
    ci = wilson(50, 100)
    assert ci.point == pytest.approx(0.5)
    assert ci.hi - ci.lo == pytest.approx(2 * math.sqrt(50 * 50 / 100 + 0.25) / 101, rel=1e-12)


@given(st.integers(1, 10_000), st.data())
def test_wilson_contains_point_estimate(n, data):
    k = data.draw(st.integers(0, n))
    ci = wilson(k, n)
    assert 0 <= ci.lo <= k / n <= ci.hi <= 1


def test_wilson_coverage():
    rng = np.random.default_rng(3)
    nominal = math.erf(1 / math.sqrt(2))
    covs = []
    for p in (0.02, 0.1, 0.3, 0.5):
        n = 400
        ks = rng.binomial(n, p, size=4000)
        covs.append(np.mean([wilson(k, n).lo <= p <= wilson(k, n).hi for k in ks]))
    assert abs(np.mean(covs) - nominal) < 0.03


def test_wilson_beats_normal_at_zero_counts():
    assert normal_ci(0, 1000).hi == 0.0
    assert wilson(0, 1000).hi > 0.0


def test_count_validation():
    with pytest.raises(ValueError):
        wilson(5, 3)
    with pytest.raises(ValueError):
        wilson(0, 0)


def test_ramsey_model_limits():
    assert ramsey_model(0, 0.0, 0.3) == pytest.approx(1.0)
    assert ramsey_model(10_000, 0.0, 0.1) == pytest.approx(0.5)
    assert ramsey_model(2, 0.0, 0.5) == pytest.approx(0.5)


def test_fit_ramsey_on_table():
    fit = fit_ramsey(ramsey_counts(), mcmc=True, seed=0, steps=4000)
    assert 0.7e-4 <= fit.eps <= 1.5e-4
    assert 1e-5 <= fit.s <= 8e-5
    assert fit.eps_ci[0] <= 1.1e-4 <= fit.eps_ci[1]


def test_fit_ramsey_recovers_synthetic_truth():
    rng = np.random.default_rng(1)
    s, eps, n = 0.01, 2e-3, 200_000
    data = [(L, rng.binomial(n, ramsey_model(L, s, eps)), n) for L in (0, 4, 8, 16, 32)]
    fit = fit_ramsey(data, mcmc=False)
    assert fit.eps == pytest.approx(eps, rel=0.1)
    assert fit.s == pytest.approx(s, rel=0.2)
    assert ramsey_loglike(data, fit.s, fit.eps) >= ramsey_loglike(data, s, eps)


def test_fit_ramsey_input_errors():
    with pytest.raises(ValueError):
        fit_ramsey([(1, 5, 10), (2, 5, 10)], mcmc=False)
    with pytest.raises(ValueError):
        fit_ramsey([(2, 5, 10), (2, 6, 10)], mcmc=False)
    with pytest.raises(ValueError):
        fit_ramsey(ramsey_counts(), prior="jeffreys")


def test_mcmc_gaussian_quantiles():
    out = mcmc_ci(lambda x: -0.5 * float(x @ x), [0.0, 0.0], chains=2, steps=20_000, seed=5)
    q = out["quantiles"]
    assert q[1] == pytest.approx([0, 0], abs=0.1)
    assert q[2] - q[0] == pytest.approx([2.0, 2.0], rel=0.1)
    assert all(0.1 < r < 0.6 for r in out["acceptance"])


def test_mcmc_rejects_bad_start():
    with pytest.raises(ValueError):
        mcmc_ci(lambda x: -math.inf, [0.0])


@given(st.floats(0.1, 100), st.floats(0.5, 5))
def test_power_law_exact_recovery(A, b):
    ps = [1e-3, 3e-3, 1e-2]
    fit = fit_power_law([(p, A * p**b) for p in ps])
    assert fit.b == pytest.approx(b, rel=1e-9)
    assert fit.A == pytest.approx(A, rel=1e-6)


def test_power_law_errors():
    with pytest.raises(ValueError):
        fit_power_law([(1e-3, 0.0), (1e-2, 1e-3)])
    with pytest.raises(ValueError):
        fit_power_law([(1e-3, 1e-5)])


def test_magic_bound():
    assert magic_bound(1.3e-4, 0.075).bound == pytest.approx(7.027e-5, rel=1e-3)
    assert magic_bound(0.0, 0.0).bound == 0.0
    with pytest.raises(ValueError):
        magic_bound(1e-4, 1.0)


def test_syndrome_probability_readings():
    assert syndrome_probability(0.85) == pytest.approx(0.075)
    assert syndrome_probability(0.15, reading="accept") == pytest.approx(0.075)
