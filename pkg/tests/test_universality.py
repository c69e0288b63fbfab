import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dirichlet_lab import universality as un
from dirichlet_lab.errors import NotFoundError, ResolutionError
from dirichlet_lab.series import DirichletSeriesSpec, eval_smoothed

APZ = DirichletSeriesSpec.alternating_prime_zeta()


# -- grids and targets -------------------------------------------------------------


def test_grid_axes_and_spacing():
    K = un.CompactGrid(0.75, 0.9, 0.0, 0.5, 0.05)
    assert len(K.sigmas) == 4 and len(K.ts) == 11
    assert K.spacing <= 0.05 + 1e-15
    assert K.points.shape == (44,)
    assert K.refine(2).spacing <= 0.025 + 1e-15


def test_grid_validation():
    with pytest.raises(ValueError):
        un.CompactGrid(0.9, 0.8, 0, 1, 0.1)
    with pytest.raises(ValueError):
        un.CompactGrid(0.6, 0.9, 0, 1, 0.1).check_strip(un.default_strip(APZ))
    un.CompactGrid(0.75, 0.9, 0, 1, 0.1).check_strip(un.default_strip(APZ))


def test_default_strips():
    assert un.default_strip(APZ) == pytest.approx((2 / 3, 1.0))
    assert un.default_strip(DirichletSeriesSpec.poly_log((0.0, 1.0))) == pytest.approx((0.5, 1.0))


@pytest.mark.parametrize(
    "f, s, expected",
    [
        (un.TargetFunction("constant", {"value": 2 - 1j}), 0.8 + 0.1j, 2 - 1j),
        (un.TargetFunction("polynomial", {"coeffs": [1, 0, 1]}), 0.8 + 0.1j, 1 + (0.8 + 0.1j) ** 2),
        (un.TargetFunction("exp-polynomial", {"coeffs": [0, 1j]}), 0.8, cmath.exp(0.8j)),
        (un.TargetFunction("dirichlet-polynomial", {"coeffs": [1, -1], "lambdas": [0.0, math.log(2)]}), 1.0, 0.5),
    ],
)
def test_target_values(f, s, expected):
    v = f.evaluate_rows(np.array([s.real if isinstance(s, complex) else s]), np.array([complex(s).imag]))
    assert abs(v[0, 0] - expected) < 1e-14


def test_target_roundtrip_and_kinds():
    f = un.TargetFunction("polynomial", {"coeffs": [1 + 2j, 3]})
    assert un.TargetFunction.from_dict(f.to_dict()) == f
    with pytest.raises(ValueError):
        un.TargetFunction("spline")
    assert un.TargetFunction("exp-polynomial", {"coeffs": [1]}).nonvanishing
    assert not un.TargetFunction("constant", {"value": 0}).nonvanishing


# -- sup distance --------------------------------------------------------------------


def test_sup_distance_of_own_translate_is_zero():
    K = un.CompactGrid(0.75, 0.9, 0.0, 0.5, 0.05)
    ev = un.Evaluator(APZ, X=3000.0)
    f = un.TargetFunction("translate", {"tau0": 12.0})
    assert un.sup_distance(APZ, f, K, 12.0, ev) == 0.0
    assert un.sup_distance(APZ, f, K, 12.5, ev) > 0.0


def test_sup_distance_matches_pointwise_evaluation():
    K = un.CompactGrid(0.8, 0.85, 0.0, 0.2, 0.1)
    ev = un.Evaluator(APZ, X=3000.0)
    f = un.TargetFunction("constant", {"value": 0.3})
    _, gmax, _ = un.sup_distance(APZ, f, K, 20.0, ev, with_parts=True)
    ref = max(abs(eval_smoothed(APZ, s + 20j, 3000.0).value - 0.3) for s in K.points)
    assert gmax == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("tau", [3.0, 21.0, 40.0])
def test_continuity_margin_covers_refined_grid(tau):
    K = un.CompactGrid(0.75, 0.9, 0.0, 0.5, 0.05)
    f = un.TargetFunction("polynomial", {"coeffs": [0.2, 0.1j]})
    r = un.validate_margin(APZ, f, K, tau, un.Evaluator(APZ, X=3000.0))
    assert r["ok"] and r["fine"] >= r["coarse"] - 1e-12


# -- tau scan ------------------------------------------------------------------------------


def test_scan_resolution_error():
    K = un.CompactGrid(0.75, 0.9, 0.0, 0.5, 0.05)
    with pytest.raises(ResolutionError):
        un.tau_scan(APZ, un.TargetFunction("constant", {"value": 0}), K, 0.1, 10.0, 0.5, un.Evaluator(APZ, X=3000.0))


def test_scan_finds_translate_and_is_consistent():
    K = un.CompactGrid(0.75, 0.9, 0.0, 0.5, 0.05)
    ev = un.Evaluator(APZ, X=2000.0)
    f = un.TargetFunction("translate", {"tau0": 5.0})
    r = un.tau_scan(APZ, f, K, 0.05, 10.0, 1 / 16, ev, windows=4)
    assert r.best_tau == 5.0 and r.best_error < 1e-12  # batched vs single-tau rounding
    assert r.n_tau == 160 and len(r.distances) == 160
    assert r.good_measure == pytest.approx(sum(r.window_measure))
    assert r.ldens_estimate == pytest.approx(r.good_measure / 10.0)
    assert not r.inconclusive


def test_scan_threads_and_chunking_identical():
    K = un.CompactGrid(0.8, 0.9, 0.0, 0.2, 0.1)
    ev = un.Evaluator(APZ, X=2000.0)
    f = un.TargetFunction("constant", {"value": 0.1})
    from dirichlet_lab.config import ScanConfig

    a = un.tau_scan(APZ, f, K, 0.2, 8.0, 1 / 16, ev, threads=1)
    b = un.tau_scan(APZ, f, K, 0.2, 8.0, 1 / 16, ev, threads=3, config=ScanConfig(chunk=7))
    assert a.distances == b.distances


def test_scan_inconclusive_when_nothing_good(tmp_path):
    K = un.CompactGrid(0.8, 0.9, 0.0, 0.2, 0.1)
    f = un.TargetFunction("constant", {"value": 50.0})
    r = un.tau_scan(APZ, f, K, 0.01, 4.0, 1 / 16, un.Evaluator(APZ, X=2000.0))
    assert r.inconclusive and r.good_measure == 0.0
    r.to_csv(tmp_path / "d.csv")
    assert (tmp_path / "d.csv").read_text().splitlines()[0] == "tau,sup_distance"


# -- Kronecker --------------------------------------------------------------------------


def test_kronecker_single_frequency_exact():
    tau = un.kronecker_witness([2.0], [1.0], 1e-9, 10.0)
    assert tau == pytest.approx(0.5)


@given(st.lists(st.floats(0, 2 * math.pi), min_size=2, max_size=2))
def test_kronecker_two_primes(phis):
    lam = np.log([2.0, 3.0])
    tau = un.kronecker_witness(lam, phis, 0.1, 2000.0)
    assert 0 <= tau <= 2000.0
    assert un.phase_error(lam, phis, tau)[0] < 0.1


def test_kronecker_rationally_dependent_raises():
    lam = [math.log(2), 2 * math.log(2)]  # phases must satisfy phi_2 = 2 phi_1
    with pytest.raises(NotFoundError) as exc:
        un.kronecker_witness(lam, [0.0, math.pi], 0.1, 500.0)
    assert exc.value.best_error >= 0.1


def test_kronecker_oracle_agrees():
    lam = np.log([2.0, 3.0, 5.0])
    phis = [1.0, 2.0, 3.0]
    tau = un.kronecker_witness(lam, phis, 0.2, 1e5)
    ref = un.kronecker_oracle(lam, phis, 0.2, 1e5)
    assert ref is not None and un.phase_error(lam, phis, ref)[0] < 0.2
    assert un.phase_error(lam, phis, tau)[0] < 0.2


def test_phase_target_is_hit_by_truncated_translate():
    phis = [0.3, 1.1, 2.0]
    f = un.phase_target(APZ, phis, m=3)
    seq, a = APZ.terms(3)
    tau = un.kronecker_witness(seq.lambdas, phis, 0.05, 1e5)
    s = 0.8 + 0.1j
    lhs = sum(a[j] * cmath.exp(-(s + 1j * tau) * seq.lambdas[j]) for j in range(3))
    rhs = f.evaluate_rows(np.array([0.8]), np.array([0.1]))[0, 0]
    # each term differs by |a_j| e^(-sigma lambda_j) |e^(-i delta) - 1| <= that times 0.05
    bound = sum(abs(a[j]) * math.exp(-0.8 * seq.lambdas[j]) for j in range(3)) * 0.05
    assert abs(lhs - rhs) <= bound
