import json
import math
from pathlib import Path

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dirichlet_lab import estimates as es
from dirichlet_lab.errors import EmptyIntervalError, HypothesisError, ZeroGapError
from dirichlet_lab.frequencies import first_primes, lambda_values
from dirichlet_lab.series import CoefficientModel, DirichletSeriesSpec

DATA = Path(__file__).parent / "data"


# -- Montgomery-Vaughan ------------------------------------------------------------


def test_mv_single_term():
    main, err = es.mv_bound([1.0], [0.7], 5.0)
    assert main == 5.0 and err == 0.0
    assert es.mean_square_quadrature([1.0], [0.7], 5.0) == pytest.approx(5.0, rel=1e-14)


def test_mv_two_terms_full_period():
    assert es.mean_square_exact([1, 1], [0.0, 2 * math.pi], 1.0) == pytest.approx(2.0, abs=1e-14)
    assert es.mean_square_quadrature([1, 1], [0.0, 2 * math.pi], 1.0) == pytest.approx(2.0, abs=1e-12)


def test_zero_gap():
    with pytest.raises(ZeroGapError):
        es.mv_bound([1, 1], [1.0, 1.0], 10.0)


def test_quadrature_against_mpmath():
    rng = np.random.default_rng(4)
    a = np.exp(2j * np.pi * rng.uniform(size=20))
    lam = np.log(first_primes(20).astype(float))
    T = 100.0
    f = lambda t: abs(sum(complex(a[k]) * mp.expj(lam[k] * t) for k in range(20))) ** 2  # noqa: E731
    ref = float(mp.quad(f, np.linspace(0, T, 41).tolist()))
    assert es.mean_square_quadrature(a, lam, T) == pytest.approx(ref, rel=1e-10)
    assert es.mean_square_exact(a, lam, T) == pytest.approx(ref, rel=1e-10)


def test_unimodular_corpus_within_global_constant():
    K = json.loads((DATA / "mv_constant.json").read_text())["K"]
    rng = np.random.default_rng(11)
    lam = np.log(first_primes(20).astype(float))
    for _ in range(10):
        a = np.exp(2j * np.pi * rng.uniform(size=20))
        main, err = es.mv_bound(a, lam, 100.0)
        assert abs(es.mean_square_quadrature(a, lam, 100.0) - main) <= K * err


def test_worst_case_dominates_sampled():
    for a, lam, T in es.mv_corpus(10, 30, 100.0, seed=2):
        worst, _ = es.mv_worst_case(lam, T)
        main, err = es.mv_bound(a, lam, T)
        assert abs(es.mean_square_exact(a, lam, T) - main) / err <= worst * (1 + 1e-10)


def test_fitted_constant_is_regression_stable():
    rec = json.loads((DATA / "mv_constant.json").read_text())
    c = rec["corpus"]
    r = es.fit_mv_constant(c["n_sums"], c["max_terms"], c["T"], c["seed"], reshuffles=())
    assert r.K == pytest.approx(rec["K"], rel=1e-9)


# -- moments ---------------------------------------------------------------------------


def test_moment_single_term_sigma_zero():
    spec = DirichletSeriesSpec.from_list([0.9], [1.5 - 2j])
    r = es.moment_quadrature(spec, 0.0, 50.0, "direct")
    assert r.quadrature_value == pytest.approx(abs(1.5 - 2j) ** 2, rel=1e-13)
    assert r.stable


def test_moment_zeta_family_stable():
    spec = DirichletSeriesSpec.poly_log((0.0, 1.0))
    r = es.moment_quadrature(spec, 0.8, 200.0, "em")
    assert math.isfinite(r.quadrature_value) and r.refinement_change < 0.01
    assert min(r.quadrature_value, r.mv_main, r.mv_error, r.node_count) >= 0


def test_moment_afe_vs_em():
    spec = DirichletSeriesSpec.poly_log((0.0, 1.0))
    a = es.moment_quadrature(spec, 1.2, 100.0, "afe", x=1000.0)
    e = es.moment_quadrature(spec, 1.2, 100.0, "em")
    assert abs(a.quadrature_value / e.quadrature_value - 1) < 0.005


def test_moment_boundedness_rules():
    mk = lambda v: es.MomentReport(0.8, 1.0, v, 0, 0, 1, "x", 0, True)  # noqa: E731
    assert es.moment_boundedness([mk(1.0), mk(1.1), mk(1.15)])["pass"]
    assert not es.moment_boundedness([mk(1.0), mk(1.3), mk(1.7)])["pass"]
    assert not es.moment_boundedness([mk(1.0), mk(0.5), mk(3.5)])["pass"]


# -- Van der Corput ------------------------------------------------------------------


def test_vdc_constant_phase():
    r = es.vdc_transform(lambda u: np.ones_like(u), lambda u: np.zeros_like(u), 0.0, 10.0, dg=lambda u: 0.0 * u)
    assert r.sum == pytest.approx(11) and r.integral == pytest.approx(10, abs=1e-12)
    assert r.within


def test_vdc_log_phase_against_mpmath():
    g = lambda u: 1.0 / u  # noqa: E731
    f = lambda u: -np.log(u) / (2 * np.pi)  # noqa: E731
    r = es.vdc_transform(g, f, 10.0, 1000.0)
    # int u^(-1-i) du = (10^-i - 1000^-i) / i
    ref = complex((mp.power(10, -1j) - mp.power(1000, -1j)) / 1j)
    assert abs(r.integral - ref) < 1e-12
    direct = sum(complex(mp.power(n, -1 - 1j)) for n in range(10, 1001))
    assert abs(r.sum - direct) < 1e-12
    assert r.within


@pytest.mark.parametrize(
    "g, f, cond",
    [
        (lambda u: 1.0 / u, lambda u: 0.6 * u, "|f'|"),
        (lambda u: u, lambda u: 0.0 * u, "non-increasing"),
        (lambda u: -1.0 / u, lambda u: 0.0 * u, "positive"),
        (lambda u: 1.0 / u, lambda u: 0.01 * np.sin(u), "monotonic"),
    ],
)
def test_vdc_hypothesis_errors(g, f, cond):
    with pytest.raises(HypothesisError) as exc:
        es.vdc_transform(g, f, 10.0, 100.0)
    assert cond in exc.value.condition and exc.value.witness is not None


@given(st.floats(0.5, 3.0), st.floats(0.001, 0.3), st.floats(2.0, 50.0))
def test_vdc_certificate_holds_on_corpus(p, t, a):
    g = lambda u: u**-p  # noqa: E731
    f = lambda u: -t * np.log(u) / (2 * np.pi)  # noqa: E731
    r = es.vdc_transform(g, f, a, a + 400.0)
    assert r.within


# -- tail sums -----------------------------------------------------------------------


def test_tail_sum_integers():
    seq = lambda_values("integers", (0, 1), 200_000)
    a = np.ones(len(seq))
    r = es.tail_sum_check(0.0, 1.0, None, 1.0, 0.75, 1e3, seq, a)
    assert r.ok and r.exponent == pytest.approx(0.5)
    r2 = es.tail_sum_check(0.0, 1.0, None, 1.0, 0.75, 2e3, seq, a)
    assert r2.S / r.S <= 2 ** (0.5 + 0.1)


def test_tail_sum_small_x():
    seq = lambda_values("integers", (0, 1), 1000)
    r = es.tail_sum_check(0.0, 1.0, None, 1.0, 0.75, 1e-3, seq, np.ones(1000))
    assert r.S < 1e-300 and r.ok


def test_tail_sum_hypotheses():
    seq = lambda_values("integers", (0, 1), 1000)
    with pytest.raises(HypothesisError):
        es.tail_sum_check(0.0, 1.0, None, 1.0, 0.4, 10.0, seq, np.ones(1000))  # sigma <= beta/2
    with pytest.raises(HypothesisError):
        es.tail_sum_check(0.0, 2.0, None, 1.0, 0.75, 10.0, seq, np.ones(1000))  # lambda_n < 2 log n
    with pytest.raises(HypothesisError):
        es.tail_sum_check(0.0, 1.0, 5.0, 1.0, 0.75, 10.0, seq, np.ones(1000))  # gap constant too large


# -- density -------------------------------------------------------------------------------


def test_ddens_integers():
    spec = DirichletSeriesSpec.poly_log((0.0, 1.0))
    r = es.ddens_check(spec, 1.0, 0.0, np.arange(8.0, 12.01, 0.5))
    # e^x / x^2 integers per interval: slope 1 after the x^-2 factor is removed
    assert abs(r.adjusted_exponent - 1.0) < 0.02
    assert all(s >= 0 for s in r.interval_sums)


def test_ddens_alternating_prime_zeta_counts_match_sieve():
    spec = DirichletSeriesSpec.alternating_prime_zeta()
    r = es.ddens_check(spec, 1.0, 0.2, np.arange(8.0, 14.01, 1.0))
    from dirichlet_lab.frequencies import prime_interval_count

    assert r.counts == [prime_interval_count(x, 1.0) for x in r.x_grid]
    assert r.interval_sums == [float(c) for c in r.counts]


def test_ddens_empty_interval():
    spec = DirichletSeriesSpec.from_list([1.0, 1.5, 2.0], [1, 1, 1])
    r = es.ddens_check(spec, 1.0, 0.0, [1.0, 1.5, 5.0])
    assert r.empty_x == [5.0]
    with pytest.raises(EmptyIntervalError):
        es.ddens_check(spec, 1.0, 0.0, [1.0, 1.5, 5.0], strict=True)


def test_ddens_grid_must_increase():
    with pytest.raises(ValueError):
        es.ddens_check(DirichletSeriesSpec.alternating_prime_zeta(), 1.0, 0.2, [9.0, 8.0])


@given(st.floats(8.0, 13.0), st.floats(0.1, 2.0), st.floats(0.0, 2.0))
def test_interval_sums_monotone_in_alpha(x, alpha, extra):
    spec = DirichletSeriesSpec.alternating_prime_zeta()
    lo, _ = es.interval_sums(spec, alpha, [x])
    hi, _ = es.interval_sums(spec, alpha + extra, [x])
    assert hi[0] >= lo[0]


# -- Dwa diagnostics -------------------------------------------------------------------------


def test_b_epsilon_limit():
    # d = 1: B(eps) -> (2 - 2 sigma0) / sigma1 as eps -> 0
    vals = [es.b_epsilon(1, 2 / 3, 0.8, e) for e in (1e-2, 1e-4, 1e-6)]
    assert abs(vals[1] - vals[2]) < abs(vals[0] - vals[1])
    assert vals[2] == pytest.approx((2 - 4 / 3) / 0.8, rel=1e-5)


def test_growth_exponent_finite_and_stable():
    spec = DirichletSeriesSpec.alternating_prime_zeta()
    b1 = es.growth_exponent(spec, 0.85, 2.0, 200.0, X=5000.0)
    b2 = es.growth_exponent(spec, 0.85, 2.0, 400.0, X=5000.0)
    assert math.isfinite(b1) and abs(b1 - b2) < 0.25


def test_random_model_spec_is_accepted_by_moments():
    spec = DirichletSeriesSpec("primes", CoefficientModel("random", random_kind="steinhaus", seed=1))
    r = es.moment_quadrature(spec, 0.9, 50.0, X=2000.0)
    assert r.quadrature_value > 0 and r.stable
