import math

import numpy as np
import pytest

from tml.dyck import catalan
from tml.ensemble import rademacher, sample_symmetric_matrix, skew12
from tml.spectral import (
    EDGE_EXPONENT,
    concentration_bound,
    concentration_experiment,
    edge_exceedance_experiment,
    largest_eigenvalue,
    markov_tail_bound,
    mc_expected_trace,
    spectral_norm,
    trace_power,
    wigner_trace_prediction,
    wigner_trace_prediction_refined,
)


def random_symmetric(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n))
    return (a + a.T) / 2.0


# ---------- eigenvalue routines ----------


def test_largest_eigenvalue_dense():
    a = np.diag([3.0, -7.0, 1.0])
    assert largest_eigenvalue(a) == pytest.approx(3.0)
    b = random_symmetric(20, seed=1)
    assert largest_eigenvalue(b) == pytest.approx(np.linalg.eigvalsh(b)[-1], rel=1e-12)


def test_largest_eigenvalue_iterative_matches_dense():
    # above the dense cutoff the Lanczos route takes over
    a = random_symmetric(120, seed=2)
    dense = float(np.linalg.eigvalsh(a)[-1])
    assert largest_eigenvalue(a) == pytest.approx(dense, abs=1e-7)
    # deterministic starting vector makes reruns identical
    assert largest_eigenvalue(a) == largest_eigenvalue(a)


def test_largest_eigenvalue_rejects_asymmetric():
    with pytest.raises(ValueError):
        largest_eigenvalue(np.array([[0.0, 1.0], [0.5, 0.0]]))
    with pytest.raises(ValueError):
        largest_eigenvalue(np.zeros((2, 3)))


def test_spectral_norm():
    a = np.diag([2.0, -5.0])
    assert spectral_norm(a) == pytest.approx(5.0)
    b = random_symmetric(30, seed=3)
    assert spectral_norm(b) == pytest.approx(np.linalg.norm(b, 2), rel=1e-10)


def test_trace_power_two_routes_agree():
    a = random_symmetric(10, seed=4)
    for s in (1, 2, 3, 5):
        via_power = trace_power(a, s, method="power")
        via_eig = trace_power(a, s, method="eig")
        assert via_power == pytest.approx(via_eig, rel=1e-10)
    with pytest.raises(ValueError):
        trace_power(a, 0)
    with pytest.raises(ValueError):
        trace_power(a, 1, method="det")


# ---------- Monte Carlo trace ----------


def test_mc_expected_trace_deterministic():
    d = skew12()
    a = mc_expected_trace(d, 4, 2, trials=200, seed=7)
    b = mc_expected_trace(d, 4, 2, trials=200, seed=7)
    assert (a.mean, a.stderr) == (b.mean, b.stderr)
    assert a.trials == 200 and a.n == 4 and a.s == 2


def test_mc_expected_trace_thread_invariance():
    d = skew12()
    serial = mc_expected_trace(d, 6, 2, trials=64, seed=11, threads=1)
    pooled = mc_expected_trace(d, 6, 2, trials=64, seed=11, threads=4)
    assert serial.mean == pooled.mean
    assert serial.stderr == pooled.stderr


def test_mc_expected_trace_degenerate_case():
    # n=1 rademacher: Tr A^(2s) = x^(2s) = 1 identically
    est = mc_expected_trace(rademacher(), 1, 3, trials=50, seed=0)
    assert est.mean == 1.0
    assert est.stderr == 0.0


def test_mc_matches_exact_small():
    # E[Tr A^2] = n sigma^2 = 4 at n=2 for skew12
    est = mc_expected_trace(skew12(), 2, 1, trials=4000, seed=21)
    assert abs(est.mean - 4.0) <= 4 * est.stderr


def test_mc_methods_agree():
    d = rademacher()
    via_eig = mc_expected_trace(d, 5, 3, trials=40, seed=5, method="eig")
    via_power = mc_expected_trace(d, 5, 3, trials=40, seed=5, method="power")
    assert via_eig.mean == pytest.approx(via_power.mean, rel=1e-9)
    with pytest.raises(ValueError):
        mc_expected_trace(d, 5, 3, trials=0, seed=0)


# ---------- predictions and tail bounds ----------


def test_wigner_trace_prediction():
    assert wigner_trace_prediction(10, 3, 1.0) == 10 * catalan(3)
    assert wigner_trace_prediction(7, 2, 2.0) == 7 * 2 * 2.0**4
    # the refined form is the large-s shape of the exact one
    for s in (100, 300):
        exact = wigner_trace_prediction(5, s, 1.3)
        refined = wigner_trace_prediction_refined(5, s, 1.3)
        assert refined / exact == pytest.approx(1.0, abs=0.02)


def test_markov_tail_bound():
    assert markov_tail_bound(16.0, 2.0, 1) == 1.0  # clamped
    assert markov_tail_bound(16.0, 4.0, 1) == pytest.approx(1.0)
    assert markov_tail_bound(16.0, 8.0, 1) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        markov_tail_bound(16.0, 0.0, 1)
    with pytest.raises(ValueError):
        markov_tail_bound(-1.0, 2.0, 1)


# ---------- edge exceedance ----------


def test_edge_exponent_value():
    assert EDGE_EXPONENT == pytest.approx(-6.0 / 11.0, rel=1e-15)


def test_edge_exceedance_experiment():
    d = rademacher()
    result = edge_exceedance_experiment(d, 40, trials=6, epsilon=0.05, seed=13)
    assert result.threshold == pytest.approx(
        2.0 + 40.0 ** (EDGE_EXPONENT + 0.05), rel=1e-12
    )
    assert len(result.lambda_max_values) == 6
    count = sum(1 for v in result.lambda_max_values if v > result.threshold)
    assert result.exceed_count == count
    assert result.exceed_fraction == pytest.approx(count / 6.0)
    rerun = edge_exceedance_experiment(d, 40, trials=6, epsilon=0.05, seed=13, threads=3)
    assert rerun.lambda_max_values == result.lambda_max_values
    with pytest.raises(ValueError):
        edge_exceedance_experiment(d, 40, trials=0, epsilon=0.05, seed=0)


def test_lambda_max_attains_support_scale():
    # rademacher at n=60: the top eigenvalue is near 2 sigma = 2
    sample = sample_symmetric_matrix(rademacher(), 60, seed=17)
    lam = largest_eigenvalue(sample.normalized_view)
    assert 1.5 < lam < 2.6


# ---------- concentration ----------


def test_concentration_bound_values():
    assert concentration_bound(0.0) == 1.0
    assert concentration_bound(8.0) == pytest.approx(4.0 * math.exp(-2.0))
    assert concentration_bound(100.0) < 1e-100
    with pytest.raises(ValueError):
        concentration_bound(-1.0)


def test_concentration_experiment():
    d = rademacher()
    rows = concentration_experiment(d, 50, trials=40, t_values=[0.0, 1.0, 4.0], seed=19)
    assert [r.t for r in rows] == [0.0, 1.0, 4.0]
    # deviation zero catches every sample
    assert rows[0].empirical_fraction == 1.0
    for r in rows:
        assert r.deviation == pytest.approx(d.bound_K * r.t / math.sqrt(50))
        assert 0.0 <= r.empirical_fraction <= 1.0
        assert r.bound == pytest.approx(concentration_bound(r.t))
    with pytest.raises(ValueError):
        concentration_experiment(d, 50, trials=1, t_values=[1.0], seed=0)
