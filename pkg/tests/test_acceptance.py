"""Acceptance criteria C1..C12 at their stated tolerances.

Each test records one PASS/FAIL line, printed in the pytest terminal summary.
Run as a script to print the lines without pytest.
"""

import cmath
import math
import time

import numpy as np

from dirichlet_lab import cli
from dirichlet_lab import complexmath as cm
from dirichlet_lab import randomized as rz
from dirichlet_lab.errors import HypothesisError
from dirichlet_lab.estimates import ddens_check, fit_mv_constant, moment_boundedness, moment_series, vdc_transform
from dirichlet_lab.series import DirichletSeriesSpec, eval_afe, eval_direct, eval_smoothed, euler_maclaurin
from dirichlet_lab.universality import CompactGrid, Evaluator, TargetFunction, kronecker_oracle, kronecker_witness, phase_error, tau_scan


def _sample_gamma_domain(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.uniform(-5, 10, n) + 1j * rng.uniform(-5, 5, n)
    zs = []
    while len(zs) < n:
        r = 50 * math.sqrt(rng.uniform())
        z = cmath.rect(r, rng.uniform(-math.pi, math.pi))
        dist = abs(z) if z.real >= 0 else abs(z.imag)
        if dist >= 0.1:
            zs.append(z)
    return a, np.array(zs)


def criterion_1():
    a, z = _sample_gamma_domain(1000, 1)
    t0 = time.perf_counter()
    worst = 0.0
    for ak, zk in zip(a, z):
        g0 = cm.upper_incomplete_gamma(ak, zk)
        g1 = cm.upper_incomplete_gamma(ak + 1, zk)
        r = abs(g1 - ak * g0 - cmath.exp(ak * cmath.log(zk) - zk)) / (1 + abs(g1))
        worst = max(worst, r)
    dt = time.perf_counter() - t0
    return worst <= 1e-10 and dt < 5, f"recurrence residual max {worst:.2e} (<= 1e-10), {dt:.2f} s (< 5 s)"


def criterion_2():
    worst = {50: 0.0, 500: 0.0}
    for r in worst:
        for a in (0.5, 1, 2, 3.5):
            for arg in (0, math.pi / 4, -math.pi / 4, math.pi / 2, -math.pi / 2):
                z = cmath.rect(r, arg)
                ratio = cm.upper_incomplete_gamma(a, z) / cmath.exp((a - 1) * cmath.log(z) - z)
                worst[r] = max(worst[r], abs(ratio - 1))
    ok = worst[50] <= 0.05 and worst[500] <= 0.005
    return ok, f"|ratio - 1| max {worst[50]:.2e} at |z|=50 (<= 0.05), {worst[500]:.2e} at |z|=500 (<= 0.005)"


def criterion_3():
    spec = DirichletSeriesSpec.poly_log((0.0, 1.0))
    exact = math.pi**2 / 6 - 1
    e_afe = abs(eval_afe(spec, 2, 1e3).value - exact)
    e_em = abs(euler_maclaurin(spec, 2).value - exact)
    s = 0.8 + 30j
    gap = abs(eval_afe(spec, s, 1e3).value - euler_maclaurin(spec, s).value)
    ok = e_afe <= 1e-6 and e_em <= 1e-6 and gap <= 1e-4
    return ok, f"s=2 errors afe {e_afe:.1e}, em {e_em:.1e} (<= 1e-6); s=0.8+30i gap {gap:.1e} (<= 1e-4)"


def criterion_4():
    spec = DirichletSeriesSpec.alternating_prime_zeta(count=10**6)
    t0 = time.perf_counter()
    d = eval_direct(spec, 1.5, 10**6)
    sm = eval_smoothed(spec, 1.5, 1e4, residue_order=1)
    dt = time.perf_counter() - t0
    gap = abs(d.value - sm.value)
    return gap <= 1e-8 and dt < 10, f"direct vs smoothed gap {gap:.1e} (<= 1e-8), {dt:.2f} s (< 10 s)"


def criterion_5():
    r = fit_mv_constant(n_sums=50, max_terms=50, T=100.0, seed=0)
    spread = max(abs(k / r.K - 1) for k in r.K_reshuffled)
    return r.stable, f"global K {r.K:.3f}, reshuffled K within {100 * spread:.1f}% (<= 10%)"


def criterion_6():
    spec = DirichletSeriesSpec.alternating_prime_zeta()
    reps = moment_series(spec, 0.85, (100.0, 300.0, 1000.0))
    b = moment_boundedness(reps)
    v = ", ".join(f"{x:.4f}" for x in b["values"])
    return b["pass"], f"moments [{v}], factor {b['factor']:.3f} (< 3), steps {[round(s, 3) for s in b['step_growth']]}"


def criterion_7():
    spec = DirichletSeriesSpec.alternating_prime_zeta()
    t0 = time.perf_counter()
    rep = ddens_check(spec, 1.0, 0.2, np.arange(8.0, 14.0 + 1e-9, 0.25))
    dt = time.perf_counter() - t0
    ok = rep.passed and dt < 30
    return ok, (
        f"fitted exponent {rep.fitted_exponent:.3f} (>= {rep.target_exponent:.1f}), {dt:.2f} s (< 30 s); "
        f"with x^-{rep.polylog_power:g} removed {rep.adjusted_exponent:.3f}"
    )


def criterion_8():
    g = lambda u: 1.0 / u  # noqa: E731
    f = lambda u: -np.log(u) / (2 * np.pi)  # noqa: E731
    r = vdc_transform(g, f, 10.0, 1000.0, dg=lambda u: -1.0 / u**2, df=lambda u: -1.0 / (2 * np.pi * u))
    try:
        vdc_transform(g, lambda u: 0.6 * u, 10.0, 1000.0)
        raised = False
    except HypothesisError:
        raised = True
    ok = r.within and r.C <= 10 and raised
    return ok, f"|sum - int| {r.discrepancy:.4f} <= {r.error_cert:.4f} (C={r.C:g}); violation raises: {raised}"


def criterion_9():
    spec = DirichletSeriesSpec.alternating_prime_zeta()
    K = CompactGrid(0.75, 0.9, 0.0, 0.5, 0.05)
    ev = Evaluator(spec, "smoothed", X=5000.0)
    f = TargetFunction("translate", {"tau0": 37.0})
    rep = tau_scan(spec, f, K, 0.05, 50.0, 1 / 16, ev)
    ok = rep.best_tau == 37.0 and rep.best_error <= 2 * rep.error_floor
    return ok, f"best_tau {rep.best_tau}, best_error {rep.best_error:.1e} <= 2 x floor {rep.error_floor:.1e}"


def criterion_10():
    lam = np.log([2.0, 3.0, 5.0])
    phis = np.random.default_rng(10).uniform(0, 2 * np.pi, 3)
    t0 = time.perf_counter()
    tau = kronecker_witness(lam, phis, 0.2, 1e5)
    dt = time.perf_counter() - t0
    err = float(phase_error(lam, phis, tau)[0])
    oracle = kronecker_oracle(lam, phis, 0.2, 1e5)
    ok = err < 0.2 and dt < 60 and oracle is not None
    return ok, f"tau {tau:.4f}, phase error {err:.3f} (< 0.2), {dt:.2f} s (< 60 s), oracle tau {oracle}"


def criterion_11():
    worst_p, worst_t = 0.0, 0.0
    for kind in ("steinhaus", "rademacher"):
        for seed in (0, 1, 2):
            inst = rz.RandomSeriesInstance.create(rz.RandomSignModel(kind, seed), 10**4)
            r = rz.identity_check(inst, 0.75 + 5j)
            worst_p, worst_t = max(worst_p, r.per_prime_max), max(worst_t, r.total_residual)
    ok = worst_p <= 1e-13 and worst_t <= 1e-10
    return ok, f"per-prime residual {worst_p:.1e} (<= 1e-13), truncated identity {worst_t:.1e} (<= 1e-10)"


DETERMINISM_JOBS = [
    {"command": "eval", "spec": "alternating-prime-zeta", "params": {"s": [[1.5, 0.0], [0.8, 14.0], [0.9, 30.0]], "method": "smoothed", "X": 5000.0}},
    {"command": "eval", "spec": "zeta-minus-one", "params": {"s": [[0.8, 30.0], [2.0, 0.0]], "method": "afe", "x": 1000.0}},
    {"command": "moments", "spec": "alternating-prime-zeta", "params": {"sigma": 0.85, "T": [50.0], "X": 2000.0}},
    {"command": "scan", "spec": "alternating-prime-zeta", "params": {"tau0": 7.0, "T": 10.0, "X": 2000.0}},
    {"command": "random", "seed": 3, "params": {"model": "steinhaus", "mode": "order", "N": 2000, "t_max": 300.0, "t_points": 6}},
    {"command": "random", "seed": 4, "params": {"model": "rademacher", "mode": "euler", "N": 5000, "s": [0.75, 5.0]}},
]


def criterion_12():
    bad = []
    for job in DETERMINISM_JOBS:
        merged = dict(job, params=dict(cli.DEFAULTS[job["command"]], **job["params"]))
        outs = []
        for threads in (1, 1, 3):
            rep = cli.run(merged, threads)
            assert rep["status"] == "ok", rep
            outs.append(cli.payload_bytes(rep["payload"]))
        if not (outs[0] == outs[1] == outs[2]):
            bad.append(job["command"])
    ok = not bad
    return ok, f"{len(DETERMINISM_JOBS)} jobs byte-identical across reruns and threads 1 vs 3" if ok else f"differs: {bad}"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11, criterion_12]


def _check(k, acceptance_line):
    ok, detail = CRITERIA[k - 1]()
    acceptance_line(k, ok, detail)
    assert ok, detail


def test_c01_incomplete_gamma_recurrence(acceptance_line):
    _check(1, acceptance_line)


def test_c02_asymptotic_law(acceptance_line):
    _check(2, acceptance_line)


def test_c03_zeta_cross_check(acceptance_line):
    _check(3, acceptance_line)


def test_c04_alternating_prime_zeta_direct_vs_smoothed(acceptance_line):
    _check(4, acceptance_line)


def test_c05_montgomery_vaughan_constant(acceptance_line):
    _check(5, acceptance_line)


def test_c06_moment_boundedness(acceptance_line):
    _check(6, acceptance_line)


def test_c07_ddens_exponent(acceptance_line):
    _check(7, acceptance_line)


def test_c08_van_der_corput(acceptance_line):
    _check(8, acceptance_line)


def test_c09_scanner_self_recurrence(acceptance_line):
    _check(9, acceptance_line)


def test_c10_kronecker_witness(acceptance_line):
    _check(10, acceptance_line)


def test_c11_random_identity(acceptance_line):
    _check(11, acceptance_line)


def test_c12_determinism(acceptance_line):
    _check(12, acceptance_line)


if __name__ == "__main__":
    for k, fn in enumerate(CRITERIA, 1):
        ok, detail = fn()
        print(f"C{k:<2d} {'PASS' if ok else 'FAIL'}  {detail}", flush=True)
