"""Numeric checks of mean-value, sum/integral and density estimates."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .config import MomentConfig, VdcConfig
from .errors import EmptyIntervalError, HypothesisError, ZeroGapError
from .frequencies import FrequencySequence
from .numerics import panel_nodes
from .series import DEFAULT_CONFIG, DirichletSeriesSpec, abscissas, line_panels, panel_sum, smoothed_weights

# ----------------------------------------------------------------------------
# Montgomery-Vaughan
# ----------------------------------------------------------------------------


def _lambdas(freqs) -> np.ndarray:
    if isinstance(freqs, FrequencySequence):
        return np.asarray(freqs.lambdas, dtype=float)
    return np.asarray(freqs, dtype=float)


def gaps(lam: np.ndarray) -> np.ndarray:
    """theta_n = min distance to another frequency (inf for a single term)."""
    lam = np.asarray(lam, dtype=float)
    order = np.argsort(lam, kind="stable")
    ls = lam[order]
    d = np.diff(ls)
    if np.any(d <= 0):
        raise ZeroGapError("duplicate frequencies")
    left = np.concatenate(([np.inf], d))
    right = np.concatenate((d, [np.inf]))
    out = np.empty_like(lam)
    out[order] = np.minimum(left, right)
    return out


def mv_bound(coeffs, freqs, T: float):
    """(T sum |a_n|^2, sum |a_n|^2 / theta_n)."""
    a2 = np.abs(np.asarray(coeffs, dtype=complex)) ** 2
    theta = gaps(_lambdas(freqs))
    main = T * float(np.sum(a2))
    err = float(np.sum(a2 / theta))
    return main, err


def mean_square_exact(coeffs, freqs, T: float) -> float:
    """int_0^T |sum a_n e^(i lambda_n t)|^2 dt in closed form (O(n^2))."""
    a = np.asarray(coeffs, dtype=complex)
    lam = _lambdas(freqs)
    return float(np.real(np.conj(a) @ gram_matrix(lam, T) @ a))


def mean_square_quadrature(coeffs, freqs, T: float, nodes_per_oscillation: float = 8.0, order: int = 16) -> float:
    """int_0^T |sum a_n e^(i lambda_n t)|^2 dt by composite Gauss-Legendre."""
    a = np.asarray(coeffs, dtype=complex)
    lam = _lambdas(freqs)
    width = _panel_width(float(np.max(np.abs(lam))), nodes_per_oscillation, order)
    c, o, w = panel_nodes(0.0, T, width, order)
    vals = panel_sum(np.conj(a), lam, c, o)  # conj(sum a e^(i lam t))
    return float(np.sum(np.abs(vals) ** 2 @ w))


def _panel_width(lam_max: float, per_osc: float, order: int) -> float:
    if lam_max <= 0:
        return 1.0
    return 2 * math.pi / lam_max * order / per_osc


@dataclass
class MVCorpusResult:
    K: float
    worst_ratios: list
    sampled_ratios: list
    K_reshuffled: list
    stable: bool
    seeds: list


def mv_corpus(n_sums: int = 50, max_terms: int = 50, T: float = 100.0, seed: int = 0):
    """Seeded finite sums with lambda_n = log p_n: random length, Gaussian coefficients.

    Returns a list of (coeffs, lambdas, T) triples.
    """
    from .frequencies import first_primes

    rng = np.random.default_rng(seed)
    lam_all = np.log(first_primes(max_terms).astype(float))
    corpus = []
    for _ in range(n_sums):
        m = int(rng.integers(2, max_terms + 1))
        a = rng.normal(size=m) + 1j * rng.normal(size=m)
        corpus.append((a, lam_all[:m], T))
    return corpus


def gram_matrix(lam, T: float) -> np.ndarray:
    """G with int_0^T |sum a_n e^(i lambda_n t)|^2 dt = a^* G a."""
    lam = np.asarray(lam, dtype=float)
    dl = lam[None, :] - lam[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(dl == 0, T, np.expm1(1j * dl * T) / np.where(dl == 0, 1.0, 1j * dl))


def mv_worst_case(lam, T: float):
    """Coefficients maximizing |int - T sum|a|^2| / sum |a|^2/theta on these frequencies.

    With a = theta^(1/2) b this is the spectral radius of
    theta^(1/2) (G - T I) theta^(1/2). Returns (ratio, a).
    """
    lam = np.asarray(lam, dtype=float)
    r = np.sqrt(gaps(lam))
    A = r[:, None] * (gram_matrix(lam, T) - T * np.eye(len(lam))) * r[None, :]
    w, v = np.linalg.eigh(0.5 * (A + A.conj().T))
    k = int(np.argmax(np.abs(w)))
    return float(abs(w[k])), r * v[:, k]


def mv_ratios(corpus, exact: bool = False) -> np.ndarray:
    """|int - T sum|a|^2| / sum |a|^2/theta for each member's own coefficients."""
    out = []
    for a, lam, T in corpus:
        main, err = mv_bound(a, lam, T)
        q = mean_square_exact(a, lam, T) if exact else mean_square_quadrature(a, lam, T)
        out.append(abs(q - main) / err)
    return np.asarray(out)


def mv_worst_ratios(corpus) -> np.ndarray:
    """Ratio at each member's worst-case coefficients, integrated by quadrature."""
    out = []
    for _, lam, T in corpus:
        _, a = mv_worst_case(lam, T)
        main, err = mv_bound(a, lam, T)
        out.append(abs(mean_square_quadrature(a, lam, T) - main) / err)
    return np.asarray(out)


def fit_mv_constant(n_sums=50, max_terms=50, T=100.0, seed=0, reshuffles=(1, 2, 3, 4, 5), tol=0.10) -> MVCorpusResult:
    """Global K: the smallest constant valid for every coefficient vector on every
    frequency set in the corpus. Stability: corpora drawn with other seeds give
    K within ``tol``."""
    corpus = mv_corpus(n_sums, max_terms, T, seed)
    worst = mv_worst_ratios(corpus)
    K = float(np.max(worst))
    others = [float(np.max(mv_worst_ratios(mv_corpus(n_sums, max_terms, T, s)))) for s in reshuffles]
    stable = all(abs(k / K - 1.0) <= tol for k in others)
    return MVCorpusResult(K, worst.tolist(), mv_ratios(corpus).tolist(), others, stable, [seed, *reshuffles])


# ----------------------------------------------------------------------------
# moments
# ----------------------------------------------------------------------------


@dataclass
class MomentReport:
    sigma: float
    T: float
    quadrature_value: float
    mv_main: float
    mv_error: float
    node_count: int
    method: str
    refinement_change: float
    stable: bool
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _line_terms(spec, sigma, method, X, N, x):
    """Coefficients b_n (already multiplied by e^(-lambda sigma)) and frequencies of
    the finite sum behind a path, for the MV comparison terms."""
    if method == "smoothed":
        seq, a, w = smoothed_weights(spec, X)
        return a * w * np.exp(-sigma * seq.lambdas), seq.lambdas
    n = N if method == "direct" else int(x or 1000)
    seq, a = spec.terms(n)
    return a * np.exp(-sigma * seq.lambdas), seq.lambdas


def moment_quadrature(
    spec: DirichletSeriesSpec,
    sigma: float,
    T: float,
    method: str = "smoothed",
    *,
    X: float | None = None,
    N: int | None = None,
    x: float | None = None,
    threads: int = 1,
    config: MomentConfig = MomentConfig(),
) -> MomentReport:
    """(1/T) int_0^T |D(sigma + it)|^2 dt with a node-doubling refinement check."""
    method = {"em": "euler-maclaurin"}.get(method, method)
    if method == "smoothed" and X is None:
        X = max(config.x_min, config.x_factor * T)
    if method == "afe" and x is None:
        x = max(1000.0, T / DEFAULT_CONFIG.delta)
    b, lam = _line_terms(spec, sigma, method, X, N or spec.count, x)
    lam_max = float(np.max(lam)) if len(lam) else 1.0
    width = _panel_width(lam_max, config.nodes_per_oscillation, config.panel_order)
    results = []
    for w_ in (width, width / 2):
        c, o, wts = panel_nodes(0.0, T, w_, config.panel_order)
        vals, _ = line_panels(spec, sigma, c, o, method, N=N, X=X, x=x, threads=threads, estimate_error=False)
        results.append((float(np.sum(np.abs(vals) ** 2 @ wts)) / T, len(c) * len(o)))
    (v1, _), (v2, n2) = results
    change = abs(v2 - v1) / max(abs(v2), 1e-300)
    a2 = np.abs(b) ** 2
    theta = gaps(lam) if len(lam) > 1 else np.array([np.inf])
    main = float(np.sum(a2))
    err = float(np.sum(a2 / theta)) / T
    params = {"X": X, "N": N, "x": x}
    return MomentReport(sigma, T, v2, main, err, n2, method, change, change < 0.01, params)


def moment_series(spec, sigma, T_values=(100.0, 300.0, 1000.0), method="smoothed", **kw) -> list:
    return [moment_quadrature(spec, sigma, T, method, **kw) for T in T_values]


def moment_boundedness(reports, max_factor: float = 3.0, max_step_growth: float = 0.20) -> dict:
    """Desk-scale stand-in for sup_T (1/T) int |D|^2 < inf."""
    v = np.array([r.quadrature_value for r in reports])
    factor = float(np.max(v) / np.min(v))
    steps = v[1:] / v[:-1] - 1.0
    monotone = bool(np.all(steps > 0))
    ok = factor < max_factor and not (monotone and np.any(steps > max_step_growth))
    return {"values": v.tolist(), "factor": factor, "step_growth": steps.tolist(), "pass": ok}


# ----------------------------------------------------------------------------
# Van der Corput
# ----------------------------------------------------------------------------


@dataclass
class VdcResult:
    integral: complex
    sum: complex
    error_cert: float
    discrepancy: float
    C: float

    @property
    def within(self) -> bool:
        return self.discrepancy <= self.error_cert


def _deriv(fn, u, h=None):
    h = h if h is not None else 1e-5 * np.maximum(1.0, np.abs(u))
    return (fn(u + h) - fn(u - h)) / (2 * h)


def check_vdc_hypotheses(g, f, a, b, df=None, samples: int = 1000, tol: float = 1e-12):
    u = np.linspace(a, b, samples)
    gu = np.asarray(g(u), dtype=float)
    fp = np.asarray(df(u) if df is not None else _deriv(f, u), dtype=float)
    if np.any(gu <= 0):
        k = int(np.argmin(gu))
        raise HypothesisError("g must be positive", float(u[k]))
    scale = tol * max(1.0, float(np.max(np.abs(gu))))
    dg = np.diff(gu)
    if np.any(dg > scale):
        raise HypothesisError("g must be non-increasing", float(u[int(np.argmax(dg)) + 1]))
    d2 = np.diff(gu, 2)
    if np.any(d2 < -scale):
        raise HypothesisError("g must be convex", float(u[int(np.argmin(d2)) + 1]))
    dfp = np.diff(fp)
    fscale = 1e-9 * max(1.0, float(np.max(np.abs(fp))))
    if np.any(dfp > fscale) and np.any(dfp < -fscale):
        k = int(np.argmax(dfp > fscale)) if dfp[0] < -fscale else int(np.argmax(dfp < -fscale))
        raise HypothesisError("f' must be monotonic", float(u[k + 1]))
    if np.any(np.abs(fp) >= 0.5):
        k = int(np.argmax(np.abs(fp)))
        raise HypothesisError("|f'| must stay below 1/2", float(u[k]))


def vdc_transform(g, f, a: float, b: float, dg=None, df=None, config: VdcConfig = VdcConfig()) -> VdcResult:
    """int_a^b g(u) e^(2 pi i f(u)) du and the matching integer sum.

    Hypotheses (g > 0 non-increasing convex, f' monotone with |f'| < 1/2) are
    checked by sampling; ``error_cert`` = C (g(a) + |g'(a)|).
    """
    check_vdc_hypotheses(g, f, a, b, df, config.samples)
    n = np.arange(math.ceil(a), math.floor(b) + 1, dtype=float)
    s = complex(np.sum(g(n) * np.exp(2j * np.pi * f(n)))) if len(n) else 0j
    integral = _oscillatory_integral(g, f, a, b)
    gpa = float(dg(a)) if dg is not None else float(_deriv(g, np.array([a]))[0])
    cert = config.C * (float(g(np.array([a]))[0]) + abs(gpa))
    return VdcResult(integral, s, cert, abs(s - integral), config.C)


def _oscillatory_integral(g, f, a, b, order: int = 16) -> complex:
    """Panel Gauss-Legendre with one doubling; |f'| < 1/2 bounds the phase speed."""
    def rule(width):
        c, o, w = panel_nodes(a, b, width, order)
        u = (c[:, None] + o[None, :]).ravel()
        vals = g(u) * np.exp(2j * np.pi * f(u))
        return complex(np.sum(vals.reshape(len(c), len(o)) @ w))

    width = 1.0
    v1 = rule(width)
    v2 = rule(width / 2)
    while abs(v2 - v1) > 1e-13 * max(1.0, abs(v2)) and width > 1e-3:
        width /= 2
        v1, v2 = v2, rule(width / 2)
    return v2


# ----------------------------------------------------------------------------
# tail sums
# ----------------------------------------------------------------------------


@dataclass
class TailSumReport:
    S: float
    bound: float
    exponent: float
    bound_constant: float
    C_a: float
    c_gap: float
    truncated: bool
    ok: bool


def tail_sum_check(a: float, b: float, c: float | None, beta: float, sigma: float, X: float, seq: FrequencySequence, coeffs) -> TailSumReport:
    """S = sum |a_n|^2 e^(-2 lambda sigma) e^(-2 e^lambda / X) / theta_n versus the
    majorant (C_a^2 / c) sum_n n^(2a + (beta - 2 sigma) b) exp(-2 n^b / X).

    Hypotheses are verified on the prefix: |a_n| <= C_a n^a (C_a fitted),
    lambda_n >= b log n, theta_n >= c exp(-beta lambda_n). ``c=None`` takes
    the largest c valid on the prefix.
    """
    if sigma <= beta / 2:
        raise HypothesisError("sigma must exceed beta/2", sigma)
    n = np.asarray(seq.natural_index, dtype=float)
    lam = np.asarray(seq.lambdas)
    amod = np.abs(np.asarray(coeffs, dtype=complex))
    theta = seq.gaps
    bad = np.flatnonzero(lam < b * np.log(n) - 1e-12)
    if len(bad):
        raise HypothesisError("lambda_n >= b log n", int(n[bad[0]]))
    if c is None:
        c = float(np.min(theta * np.exp(beta * lam)))
    floor = c * np.exp(-beta * lam)
    bad = np.flatnonzero(theta < floor * (1 - 1e-12))
    if len(bad):
        raise HypothesisError("theta_n >= c exp(-beta lambda_n)", int(n[bad[0]]))
    C_a = float(np.max(amod / n**a))
    with np.errstate(under="ignore"):
        wts = np.exp(-2.0 * seq.exp_lambdas / X)
        S = float(np.sum(amod**2 * np.exp(-2 * sigma * lam) * wts / theta))
    truncated = bool(seq.exp_lambdas[-1] < 20.0 * X)
    e = 2 * a + (beta - 2 * sigma) * b
    n_hi = int(min((40.0 * X) ** (1.0 / b) + 2, 5e7))
    m = np.arange(max(int(n[0]), 1), n_hi + 1, dtype=float)
    with np.errstate(under="ignore"):
        maj = float(np.sum(m**e * np.exp(-2.0 * m**b / X)))
    bound = C_a**2 / c * maj
    expo = (e + 1) / b
    bound_const = bound / max(1.0, X**expo)
    return TailSumReport(S, bound, expo, bound_const, C_a, c, truncated, S <= bound)


# ----------------------------------------------------------------------------
# density
# ----------------------------------------------------------------------------


@dataclass
class DdensReport:
    alpha: float
    beta: float
    x_grid: list
    interval_sums: list
    counts: list
    target_exponent: float
    fitted_exponent: float
    tolerance: float
    passed: bool
    empty_x: list = field(default_factory=list)
    # diagnostics: exponent after removing the x^-(k) polylog factor, and C in Definition form
    polylog_power: float = 0.0
    adjusted_exponent: float = float("nan")
    min_ratio: float = float("nan")

    def to_dict(self) -> dict:
        return asdict(self)


def interval_sums(spec: DirichletSeriesSpec, alpha: float, x_grid):
    """sum_{lambda_n in [x, x + alpha/x^2]} |a_n| and counts, per grid point."""
    x_grid = np.asarray(x_grid, dtype=float)
    top = float(np.max(x_grid + alpha / x_grid**2))
    seq, a = spec.terms_upto(top + 1e-9)
    lam = seq.lambdas
    if lam[-1] < top and len(lam) >= spec.max_terms:
        pass  # finite sequence: far intervals may be empty
    amod = np.abs(a)
    csum = np.concatenate(([0.0], np.cumsum(amod)))
    out, cnt = [], []
    for x in x_grid:
        i0 = int(np.searchsorted(lam, x, side="left"))
        i1 = int(np.searchsorted(lam, x + alpha / x**2, side="right"))
        out.append(float(csum[i1] - csum[i0]))
        cnt.append(i1 - i0)
    return np.array(out), np.array(cnt)


def ddens_check(spec: DirichletSeriesSpec, alpha: float, beta: float, x_grid, tolerance: float = 0.0, strict: bool = False) -> DdensReport:
    """Least-squares slope of log(interval sum) against x versus sigma_a - beta.

    Empty intervals are excluded from the fit and listed in ``empty_x``; with
    ``strict`` the first one raises EmptyIntervalError.
    """
    x_grid = np.asarray(x_grid, dtype=float)
    if np.any(np.diff(x_grid) <= 0):
        raise ValueError("x grid must be strictly increasing")
    sums, counts = interval_sums(spec, alpha, x_grid)
    empty = [float(x) for x, c in zip(x_grid, counts) if c == 0]
    if empty and strict:
        raise EmptyIntervalError(empty[0], (empty[0], empty[0] + alpha / empty[0] ** 2))
    keep = counts > 0
    target = abscissas(spec).sigma_a - beta
    if keep.sum() >= 2:
        xs, ls = x_grid[keep], np.log(sums[keep])
        slope = float(np.polyfit(xs, ls, 1)[0])
        k = _polylog_power(spec)
        adj = float(np.polyfit(xs, ls + k * np.log(xs), 1)[0])
        with np.errstate(divide="ignore"):
            # finite series have sigma_a = -inf, so the ratio is +inf
            ratio = float(np.min(sums[keep] / np.exp(target * xs)))
    else:
        slope = adj = ratio = float("nan")
        k = 0.0
    passed = bool(slope >= target - tolerance) if math.isfinite(slope) else False
    return DdensReport(
        alpha, beta, x_grid.tolist(), sums.tolist(), counts.tolist(), target, slope, tolerance, passed, empty, k, adj, ratio
    )


def _polylog_power(spec) -> float:
    """Power of x in the expected interval count ~ e^(sigma_a x) x^-k.

    The interval has width alpha/x^2 in lambda; primes add 1/log p ~ d/x.
    """
    return 3.0 if spec.generator == "primes" else 2.0


# ----------------------------------------------------------------------------
# Dwa conditions and the B(eps) diagnostic
# ----------------------------------------------------------------------------


def b_epsilon(d: int, sigma0: float, sigma1: float, eps: float) -> float:
    """Exponent B(eps) of the moment bound T + T^B(eps) for the prime family."""
    return (2 * ((d - 1) + eps) + (1 - 2 * sigma0) * (d - eps) + 1) / ((d - eps) * (sigma1 - eps))


@dataclass
class DwaReport:
    sigma0: float
    sigma_2: float
    condition_2: bool
    growth_exponent: float
    growth_exponent_doubled: float
    condition_3: bool
    moments: list
    condition_4: bool

    def to_dict(self) -> dict:
        return asdict(self)


def growth_exponent(spec, sigma: float, t0: float, T: float, method: str = "smoothed", samples: int = 400, **kw) -> float:
    """Smallest B with |D(sigma + it)| <= t^B on a geometric grid in [t0, T]."""
    t = np.geomspace(t0, T, samples)
    vals, _ = line_panels(spec, sigma, t, np.zeros(1), method, estimate_error=False, **kw)
    mod = np.abs(vals[:, 0])
    return float(np.max(np.log(np.maximum(mod, 1e-300)) / np.log(t)))


def dwa_check(spec, sigma0: float, sigma: float, T_values=(100.0, 300.0, 1000.0), method: str = "smoothed", **kw) -> DwaReport:
    """Conditions (2)-(4) of the Dwa class at desk scale."""
    ab = abscissas(spec)
    c2 = ab.sigma_2 <= sigma0
    T = max(T_values)
    kw_line = {k: v for k, v in kw.items() if k in ("X", "N", "x")}
    if method == "smoothed" and "X" not in kw_line:
        kw_line["X"] = max(1e4, 10 * T)
    B1 = growth_exponent(spec, sigma, 2.0, T, method, **kw_line)
    B2 = growth_exponent(spec, sigma, 2.0, 2 * T, method, **{**kw_line, **({"X": 2 * kw_line["X"]} if "X" in kw_line else {})})
    c3 = math.isfinite(B1) and abs(B2 - B1) <= max(0.1, 0.25 * abs(B1))
    reps = moment_series(spec, sigma, T_values, method)
    c4 = moment_boundedness(reps)["pass"]
    return DwaReport(sigma0, ab.sigma_2, c2, B1, B2, c3, [r.quadrature_value for r in reps], c4)


__all__ = [
    "DdensReport",
    "DwaReport",
    "MVCorpusResult",
    "MomentReport",
    "TailSumReport",
    "VdcResult",
    "b_epsilon",
    "check_vdc_hypotheses",
    "ddens_check",
    "dwa_check",
    "fit_mv_constant",
    "gram_matrix",
    "gaps",
    "interval_sums",
    "mean_square_exact",
    "mean_square_quadrature",
    "moment_boundedness",
    "moment_quadrature",
    "moment_series",
    "growth_exponent",
    "mv_bound",
    "mv_corpus",
    "mv_ratios",
    "mv_worst_case",
    "mv_worst_ratios",
    "tail_sum_check",
    "vdc_transform",
]
