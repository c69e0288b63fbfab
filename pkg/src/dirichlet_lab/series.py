"""General Dirichlet series D(s) = sum_n a_n exp(-lambda_n s).

Four evaluation paths share one spec type:

* ``eval_direct``       partial sum with a tail estimate,
* ``eval_smoothed``     Mellin-smoothed sum with weights exp(-e^lambda / X),
* ``eval_afe``          truncated sum plus incomplete-Gamma correction,
* ``euler_maclaurin``   analytic continuation by Euler's summation formula.

The last two only apply to the poly-log family
a_n = Q(n) (log n)^kappa, lambda_n = log P(n), n >= 2.
"""

from __future__ import annotations

import cmath
import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import complexmath as cm
from .config import SeriesConfig
from .errors import DivergenceError, DomainError, ParseError, PoleError
from .frequencies import (
    FrequencySequence,
    RealPolynomial,
    cached_primes,
    lambda_values,
    poly_inverse,
)
from .numerics import bernoulli, chunk_slices, gauss_legendre, ordered_map

DEFAULT_CONFIG = SeriesConfig()
METHODS = ("direct", "smoothed", "afe", "euler-maclaurin")
COEFF_KINDS = ("alternating", "poly-log", "unimodular", "list", "random")
_GEN_ALIASES = {
    "primes": "primes",
    "log-poly-of-primes": "primes",
    "integers": "integers",
    "integers-from-2": "integers",
    "log-poly-of-integers": "integers",
    "explicit": "explicit",
}


# ----------------------------------------------------------------------------
# coefficient models
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class CoefficientModel:
    """a_n as a function of the sequence's natural index n.

    ``q`` are the ascending coefficients of Q for the poly-log kind;
    ``values`` is the finite list for ``unimodular``/``list`` (zero past the
    end, indexed by position); ``random_kind``/``seed`` select a stream for
    ``random``.
    """

    kind: str
    q: tuple = (1.0,)
    kappa: float = 0.0
    values: tuple = ()
    random_kind: str = "steinhaus"
    seed: int = 0

    def __post_init__(self):
        if self.kind not in COEFF_KINDS:
            raise ValueError(f"unknown coefficient kind {self.kind!r}")
        object.__setattr__(self, "q", tuple(float(v) for v in self.q))
        object.__setattr__(self, "values", tuple(complex(v) for v in self.values))
        if self.kind == "unimodular" and any(abs(abs(v) - 1.0) > 1e-12 for v in self.values):
            raise ValueError("unimodular coefficients must have modulus 1")

    @property
    def finite(self) -> bool:
        return self.kind in ("unimodular", "list")

    @property
    def q_degree(self) -> int:
        q = list(self.q)
        while q and q[-1] == 0.0:
            q.pop()
        return len(q) - 1  # -1 for Q = 0

    @property
    def is_real(self) -> bool:
        if self.kind in ("alternating", "poly-log"):
            return True
        if self.finite:
            return all(v.imag == 0 for v in self.values)
        return self.random_kind == "rademacher"

    def q_eval(self, n):
        n = np.asarray(n, dtype=float)
        acc = np.zeros_like(n)
        for b in reversed(self.q):
            acc = acc * n + b
        return acc

    def coefficients(self, seq: FrequencySequence) -> np.ndarray:
        n = np.asarray(seq.natural_index)
        if self.kind == "alternating":
            return np.where(n % 2 == 0, 1.0, -1.0)
        if self.kind == "poly-log":
            nf = n.astype(float)
            if self.kappa == 0:
                return self.q_eval(nf)
            if self.kappa < 0 and np.any(nf <= 1):
                raise DomainError("(log n)^kappa with kappa < 0 is undefined at n = 1")
            with np.errstate(divide="ignore"):
                lg = np.log(nf)
            return self.q_eval(nf) * np.where(nf > 1, np.abs(lg) ** self.kappa, 0.0)
        pos = np.arange(len(n))
        if self.finite:
            vals = np.asarray(self.values, dtype=complex)
            out = np.zeros(len(n), dtype=complex)
            k = min(len(vals), len(n))
            out[:k] = vals[:k]
            return out.real.copy() if self.is_real else out
        from .randomized import RandomSignModel

        model = RandomSignModel(self.random_kind, self.seed)
        x = model.sample(len(n))
        return x[pos]

    def to_dict(self) -> dict:
        params: dict = {}
        if self.kind == "poly-log":
            params = {"Q": list(self.q), "kappa": self.kappa}
        elif self.finite:
            params = {"values": [[v.real, v.imag] for v in self.values]}
        elif self.kind == "random":
            params = {"model": self.random_kind, "seed": self.seed}
        return {"kind": self.kind, "params": params}

    @classmethod
    def from_dict(cls, d: dict) -> "CoefficientModel":
        kind = d["kind"]
        p = d.get("params", {}) or {}
        if kind == "poly-log":
            return cls(kind, q=tuple(p.get("Q", [1.0])), kappa=float(p.get("kappa", 0.0)))
        if kind in ("unimodular", "list"):
            vals = [complex(v[0], v[1]) if isinstance(v, (list, tuple)) else complex(v) for v in p.get("values", [])]
            return cls(kind, values=tuple(vals))
        if kind == "random":
            return cls(kind, random_kind=p.get("model", "steinhaus"), seed=int(p.get("seed", 0)))
        return cls(kind)


# ----------------------------------------------------------------------------
# series spec
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class Abscissas:
    sigma_c: float
    sigma_a: float
    sigma_2: float
    tags: dict
    reliable: bool = True

    def as_tuple(self):
        return (self.sigma_c, self.sigma_a, self.sigma_2)

    def to_dict(self) -> dict:
        f = lambda v: None if v == -math.inf else v  # noqa: E731
        return {
            "sigma_c": f(self.sigma_c),
            "sigma_a": f(self.sigma_a),
            "sigma_2": f(self.sigma_2),
            "tags": dict(self.tags),
            "reliable": self.reliable,
        }


@dataclass
class DirichletSeriesSpec:
    generator: str
    coeff: CoefficientModel
    poly: RealPolynomial | None = None
    explicit_lambdas: tuple | None = None
    count: int = 100_000
    abscissas_override: dict | None = None
    # Q-linear independence of the frequencies is assumed, never tested
    independent: bool = True
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        gen = _GEN_ALIASES.get(self.generator)
        if gen is None:
            raise ValueError(f"unknown frequency generator {self.generator!r}")
        self.generator = gen
        if gen != "explicit" and self.poly is None:
            self.poly = RealPolynomial((0.0, 1.0))
        if self.poly is not None and not isinstance(self.poly, RealPolynomial):
            self.poly = RealPolynomial(tuple(self.poly))
        if gen == "explicit":
            if not self.explicit_lambdas:
                raise ValueError("explicit generator needs a list of frequencies")
            self.explicit_lambdas = tuple(float(v) for v in self.explicit_lambdas)

    # -- constructors -------------------------------------------------------

    @classmethod
    def alternating_prime_zeta(cls, poly=(0.0, 1.0), count=100_000):
        return cls("primes", CoefficientModel("alternating"), RealPolynomial(tuple(poly)), count=count)

    @classmethod
    def poly_log(cls, P, Q=(1.0,), kappa=0.0, generator="integers", count=100_000):
        return cls(generator, CoefficientModel("poly-log", q=tuple(Q), kappa=kappa), RealPolynomial(tuple(P)), count=count)

    @classmethod
    def from_list(cls, lambdas, coefficients, unimodular=False):
        kind = "unimodular" if unimodular else "list"
        return cls("explicit", CoefficientModel(kind, values=tuple(coefficients)), explicit_lambdas=tuple(lambdas), count=len(lambdas))

    @classmethod
    def from_dict(cls, d: dict) -> "DirichletSeriesSpec":
        try:
            fr = d["frequency"]
            coeff = CoefficientModel.from_dict(d["coefficients"])
            kind = fr["kind"]
            poly = fr.get("poly")
            return cls(
                kind,
                coeff,
                RealPolynomial(tuple(poly)) if poly is not None else None,
                explicit_lambdas=tuple(fr["values"]) if "values" in fr else None,
                count=int(fr.get("count", 100_000)),
                abscissas_override=d.get("abscissas_override"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"invalid series spec: {exc}") from exc

    def to_dict(self) -> dict:
        fr: dict = {"kind": self.generator, "count": self.count}
        if self.poly is not None:
            fr["poly"] = self.poly.to_list()
        if self.explicit_lambdas is not None:
            fr["values"] = list(self.explicit_lambdas)
        d = {"frequency": fr, "coefficients": self.coeff.to_dict()}
        if self.abscissas_override:
            d["abscissas_override"] = self.abscissas_override
        return d

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    # -- data ---------------------------------------------------------------

    @property
    def degree(self) -> int:
        return self.poly.degree if self.poly is not None else 1

    @property
    def is_poly_log_family(self) -> bool:
        return self.generator == "integers" and self.coeff.kind == "poly-log"

    @property
    def max_terms(self) -> float:
        if self.generator == "explicit":
            return len(self.explicit_lambdas)
        if self.coeff.finite:
            return len(self.coeff.values)
        return math.inf

    def sequence(self, N: int) -> FrequencySequence:
        N = int(min(N, self.max_terms))
        if self.generator == "explicit":
            seq = self._cache.get("explicit")
            if seq is None:
                seq = lambda_values("explicit", values=self.explicit_lambdas)
                self._cache["explicit"] = seq
            return seq.prefix(N)
        seq = self._cache.get("seq")
        if seq is None or len(seq) < N:
            seq = lambda_values(self.generator, self.poly, max(N, 16))
            self._cache["seq"] = seq
        return seq.prefix(N)

    def terms(self, N: int):
        """(sequence, coefficients) for the first N terms."""
        seq = self.sequence(N)
        coefs = self._cache.setdefault("coef", {})
        a = coefs.get(len(seq))
        if a is None:
            if len(coefs) > 8:
                coefs.clear()
            a = self.coeff.coefficients(seq)
            coefs[len(seq)] = a
        return seq, a

    def count_upto(self, lam_max: float) -> int:
        """Number of frequencies <= lam_max."""
        if self.generator == "explicit":
            return int(np.searchsorted(self.explicit_lambdas, lam_max, side="right"))
        y = math.exp(min(lam_max, 700.0))
        if y < max(self.poly.y0, 0.0):
            return 0
        arg = poly_inverse(self.poly, y)
        if self.generator == "primes":
            lim = max(int(arg) + 1, 2)
            return cached_primes(lim).pi(lim)
        return max(int(math.floor(arg)) - 1, 0)

    def terms_upto(self, lam_max: float):
        n = self.count_upto(lam_max)
        seq = self.sequence(max(n + 2, 1))
        k = int(np.searchsorted(seq.lambdas, lam_max, side="right"))
        return self.terms(max(k, 1))


def load_spec(path) -> DirichletSeriesSpec:
    with open(path) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return DirichletSeriesSpec.from_dict(d)


# ----------------------------------------------------------------------------
# abscissas
# ----------------------------------------------------------------------------


def _estimate_abscissas(spec: DirichletSeriesSpec) -> Abscissas:
    """limsup estimates log|partial sums| / lambda_N on the cached prefix."""
    seq, a = spec.terms(min(spec.count, 200_000) if math.isfinite(spec.max_terms) is False else int(spec.max_terms))
    lam = seq.lambdas
    n = len(lam)
    if spec.coeff.finite or spec.generator == "explicit" and n < 64:
        ninf = -math.inf
        return Abscissas(ninf, ninf, ninf, {"sigma_c": "closed-form", "sigma_a": "closed-form", "sigma_2": "closed-form"})
    half = slice(n // 2, n)
    with np.errstate(divide="ignore"):
        sa = np.log(np.cumsum(np.abs(a)))[half] / lam[half]
        s2 = np.log(np.cumsum(np.abs(a) ** 2))[half] / (2 * lam[half])
        sc = np.log(np.abs(np.cumsum(a)) + 1e-300)[half] / lam[half]
    est = [float(np.max(v)) for v in (sc, sa, s2)]
    est = [max(v, 0.0) for v in est]
    spread = max(float(np.ptp(v)) for v in (sa, s2))
    tags = {k: "estimated" for k in ("sigma_c", "sigma_a", "sigma_2")}
    return Abscissas(min(est[0], est[1]), est[1], min(est[2], est[1]), tags, reliable=spread < 0.05)


def abscissas(spec: DirichletSeriesSpec) -> Abscissas:
    """(sigma_c, sigma_a, sigma_2): closed forms for covered families, else estimates."""
    cached = spec._cache.get("abscissas")
    if cached is not None:
        return cached
    kind = spec.coeff.kind
    closed = {k: "closed-form" for k in ("sigma_c", "sigma_a", "sigma_2")}
    res = None
    if spec.coeff.finite or spec.generator == "explicit" and math.isfinite(spec.max_terms):
        ninf = -math.inf
        res = Abscissas(ninf, ninf, ninf, closed)
    elif spec.generator in ("primes", "integers"):
        d = spec.degree
        if kind == "alternating":
            res = Abscissas(0.0, 1.0 / d, 1.0 / (2 * d), closed)
        elif kind == "poly-log":
            q = spec.coeff.q_degree
            if q < 0:
                res = Abscissas(-math.inf, -math.inf, -math.inf, closed)
            else:
                # Q(n) keeps one sign eventually, so conditional = absolute
                sa = (q + 1) / d
                res = Abscissas(sa, sa, (2 * q + 1) / (2 * d), closed)
        elif kind == "random" and spec.generator == "primes":
            res = Abscissas(1.0 / (2 * d), 1.0 / d, 1.0 / (2 * d), closed)
    if res is None:
        res = _estimate_abscissas(spec)
    if spec.abscissas_override:
        vals = list(res.as_tuple())
        tags = dict(res.tags)
        for i, k in enumerate(("sigma_c", "sigma_a", "sigma_2")):
            if k in spec.abscissas_override:
                v = spec.abscissas_override[k]
                vals[i] = -math.inf if v is None else float(v)
                tags[k] = "override"
        res = Abscissas(*vals, tags, res.reliable)
    spec._cache["abscissas"] = res
    return res


# ----------------------------------------------------------------------------
# results
# ----------------------------------------------------------------------------


@dataclass
class EvaluationResult:
    s: complex
    value: complex
    error_estimate: float
    method: str
    work: int
    info: dict = field(default_factory=dict)

    def csv_row(self) -> list:
        return [self.s.real, self.s.imag, self.value.real, self.value.imag, self.error_estimate, self.method, self.work]


CSV_HEADER = ["re_s", "im_s", "re_val", "im_val", "err", "method", "terms"]


def _check_finite(z: complex, what: str) -> complex:
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        from .errors import NumericOverflowError

        raise NumericOverflowError(f"{what} is not finite")
    return z


def _terms_at(a, lam, s: complex) -> np.ndarray:
    return a * np.exp(-s * lam)


def _sum(v: np.ndarray) -> complex:
    v = np.asarray(v, dtype=complex)
    return complex(math.fsum(v.real), math.fsum(v.imag))


# ----------------------------------------------------------------------------
# direct
# ----------------------------------------------------------------------------


def eval_direct(spec: DirichletSeriesSpec, s, N: int | None = None) -> EvaluationResult:
    s = complex(s)
    ab = abscissas(spec)
    if s.real <= ab.sigma_c:
        raise DivergenceError(f"Re s = {s.real} <= sigma_c = {ab.sigma_c}")
    N = int(min(N or spec.count, spec.max_terms)) if math.isfinite(spec.max_terms) else int(N or spec.count)
    seq, a = spec.terms(N)
    terms = _terms_at(a, seq.lambdas, s)
    value = _check_finite(_sum(terms), "partial sum")
    err = _direct_tail(spec, seq, a, s)
    return EvaluationResult(s, value, err, "direct", len(seq), {"sigma_c": ab.sigma_c})


def _direct_tail(spec, seq, a, s: complex) -> float:
    sigma = s.real
    n = len(seq)
    if n >= spec.max_terms:
        return 0.0
    lamN, lam_next = float(seq.lambdas[-1]), seq.next_lambda
    kind = spec.coeff.kind
    if kind == "alternating":
        first = math.exp(-sigma * lam_next)
        if s.imag == 0.0:
            # alternating series with decreasing terms: bracketed by the next term
            return first
        # pairing argument: |tail| <= next term + |s| / sigma * e^(-sigma lambda_N)
        return first + abs(s) / sigma * math.exp(-sigma * lamN)
    ab = abscissas(spec)
    if kind == "poly-log":
        # integral comparison with the local power law |a_n| e^(-lambda sigma) ~ n^-r
        d, q = spec.degree, spec.coeff.q_degree
        r = d * sigma - q
        last = abs(a[-1]) * math.exp(-sigma * lamN)
        if r <= 1:
            return math.inf
        return last * seq.natural_index[-1] / (r - 1)
    if kind == "random":
        # random signs: square-root cancellation in the tail
        tail2 = _power_tail(seq, 2 * sigma)
        return 3.0 * math.sqrt(tail2) if sigma > ab.sigma_2 else math.inf
    return _power_tail(seq, sigma) if sigma > ab.sigma_a else math.inf


def _power_tail(seq, sigma) -> float:
    """sum_{n > N} e^(-sigma lambda_n), estimated from the local growth of lambda."""
    lam = seq.lambdas
    n = len(lam)
    k = max(n // 2, 1)
    # local rate: lambda_n ~ log(n) * g
    g = (lam[-1] - lam[k - 1]) / max(math.log(n / k), 1e-12)
    if g * sigma <= 1:
        return math.inf
    return n * math.exp(-sigma * lam[-1]) / (g * sigma - 1)


# ----------------------------------------------------------------------------
# smoothed
# ----------------------------------------------------------------------------


def smoothing_cutoff(X: float, weight_cutoff: float = DEFAULT_CONFIG.weight_cutoff) -> float:
    """Largest lambda with exp(-e^lambda / X) >= weight_cutoff."""
    return math.log(X * -math.log(weight_cutoff))


def smoothed_weights(spec, X: float, config: SeriesConfig = DEFAULT_CONFIG):
    seq, a = spec.terms_upto(smoothing_cutoff(X, config.weight_cutoff))
    w = np.exp(-seq.exp_lambdas / X)
    return seq, a, w


def _smoothed_raw(seq, a, w, s: complex) -> complex:
    return _sum(a * w * np.exp(-s * seq.lambdas))


def _smoothed_corrected(spec, s: complex, X: float, k: int, config: SeriesConfig):
    seq, a, w = smoothed_weights(spec, X, config)
    value = _smoothed_raw(seq, a, w, s)
    shifted = [_smoothed_raw(seq, a, w, s - j) for j in range(1, k + 2)]
    for j in range(1, k + 1):
        value -= (-1) ** j / (math.factorial(j) * X**j) * shifted[j - 1]
    # twice the first omitted residue
    lead = 2 * abs(shifted[k]) / (math.factorial(k + 1) * X ** (k + 1))
    trunc = abs(a[-1]) * config.weight_cutoff * math.exp(-s.real * seq.lambdas[-1])
    return value, lead + trunc, len(seq)


def eval_smoothed(
    spec: DirichletSeriesSpec,
    s,
    X: float,
    residue_order: int | None = None,
    config: SeriesConfig = DEFAULT_CONFIG,
) -> EvaluationResult:
    """sum a_n e^(-lambda_n s) exp(-e^lambda_n / X).

    With ``residue_order`` k > 0 the first k Mellin residues of the smoothing
    kernel are added back: S_X(s) - sum_j (-1)^j / (j! X^j) S_X(s - j).
    The raw sum (k = 0) is biased by about D(s-1)/X.
    """
    s = complex(s)
    if X <= 0:
        raise DomainError("X must be positive")
    k = config.residue_order if residue_order is None else int(residue_order)
    value, err, work = _smoothed_corrected(spec, s, X, k, config)
    if k > 0:
        # the shifted sums are themselves smoothed, so compare with X/2
        half, _, _ = _smoothed_corrected(spec, s, X / 2, k, config)
        err = max(err, abs(value - half))
    info = {"X": X, "residue_order": k}
    return EvaluationResult(s, _check_finite(value, "smoothed sum"), err, "smoothed", work, info)


# ----------------------------------------------------------------------------
# poly-log family: incomplete-Gamma term, Euler-Maclaurin, AFE
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class _Family:
    P: RealPolynomial
    q: tuple
    kappa: float
    start: int  # first index n of the series
    c: float  # Q = c P' + Q1
    q1: tuple

    @property
    def d(self):
        return self.P.degree

    @property
    def lead(self):
        return self.P.lead


def _family(spec: DirichletSeriesSpec) -> _Family:
    if not spec.is_poly_log_family:
        raise DomainError("this evaluation path needs the poly-log family over the integers")
    key = "family"
    fam = spec._cache.get(key)
    if fam is not None:
        return fam
    P = spec.poly
    d = P.degree
    q = list(spec.coeff.q) + [0.0] * d
    q = q[: max(len(spec.coeff.q), 1)]
    if len(q) > d:
        if any(v != 0.0 for v in q[d:]):
            raise DomainError("deg Q must be < deg P")
        q = q[:d]
    qd1 = q[d - 1] if len(q) >= d else 0.0
    c = qd1 / (d * P.lead)
    dP = P.derivative()
    q1 = [(q[k] if k < len(q) else 0.0) - c * (dP[k] if k < len(dP) else 0.0) for k in range(d)]
    q1[d - 1] = 0.0
    seq = spec.sequence(1)
    fam = _Family(P, tuple(q), float(spec.coeff.kappa), int(seq.natural_index[0]), c, tuple(q1))
    spec._cache[key] = fam
    return fam


def _phi(fam: _Family, n, s):
    """a_n P(n)^(-s) as a smooth function of n (array n, scalar or broadcast s)."""
    n = np.asarray(n, dtype=float)
    qv = np.polynomial.polynomial.polyval(n, fam.q)
    lp = np.log(fam.P(n))
    out = qv * np.exp(-np.multiply.outer(s, lp)) if np.ndim(s) else qv * np.exp(-s * lp)
    if fam.kappa != 0:
        out = out * np.log(n) ** fam.kappa
    return out


def gamma_term(fam: _Family, s: complex, N: float) -> complex:
    """c * int_N^inf P'(u) d^-kappa log^kappa(P(u)/b_d) P(u)^-s du in closed form.

    Equals c b_d^(1-s) d^-kappa (s-1)^-(kappa+1) Gamma(kappa+1, (s-1) log(P(N)/b_d)).
    """
    if fam.c == 0.0:
        return 0j
    kappa = fam.kappa
    w_n = math.log(float(fam.P(N)) / fam.lead)
    if w_n <= 0:
        raise DomainError("truncation point too small: P(N) <= leading coefficient")
    sm1 = s - 1.0
    if sm1 == 0:
        raise PoleError("pole of the continuation at s = 1")
    int_kappa = kappa == math.floor(kappa) and kappa >= 0
    if sm1.imag == 0.0 and sm1.real < 0 and not int_kappa:
        raise DomainError("s real < 1 lies on the branch cut when kappa is not a nonnegative integer")
    a = kappa + 1.0
    z = sm1 * w_n
    if int_kappa:
        pw = sm1 ** -(int(kappa) + 1)
    else:
        pw = cmath.exp(-a * cmath.log(sm1))
    if abs(z) <= 1.0:
        # Gamma(a) (s-1)^-a minus the entire part, which has no cancellation near s = 1
        low = w_n**a * cmath.exp(-z) * cm._lower_series_kummer(complex(a), z)
        val = cm.gamma(a) * pw - low
    else:
        val = pw * cm.upper_incomplete_gamma(a, z)
    return fam.c * d_pow(fam.d, -kappa) * cmath.exp((1.0 - s) * math.log(fam.lead)) * val


def d_pow(d, e):
    return float(d) ** e


def _log_poly_parts(fam: _Family, y: np.ndarray):
    """For u = e^y: log P(u), rho = P/(b_d u^d) - 1 and rho' = u P'/(b_d u^d) - d."""
    d = fam.d
    b = np.asarray(fam.P.coefficients) / fam.lead
    x = np.exp(-y)
    rho = np.zeros_like(y)
    rhop = np.zeros_like(y)
    # terms b_k u^(k-d) = b_k x^(d-k), k < d
    for k in range(d):
        t = b[k] * x ** (d - k)
        rho += t
        rhop += k * t
    logP = math.log(fam.lead) + d * y + np.log1p(rho)
    return logP, rho, rhop


def _remainder_integrand_parts(fam: _Family, y: np.ndarray, sigma: float):
    """Split the y-integrand of the remainder as G(y) exp(-i t log P(e^y)).

    Returns (G, logP) with G real-valued (for the real part sigma of s).
    """
    d, kappa = fam.d, fam.kappa
    logP, rho, rhop = _log_poly_parts(fam, y)
    base = (1.0 - sigma) * logP  # log |P^(1-s)|
    G = np.zeros_like(y)
    ylk = y**kappa if kappa != 0 else np.ones_like(y)
    if any(v != 0.0 for v in fam.q1):
        # Q1(u) u / P(u) = sum_j q1_j/b_d x^(d-1-j) / (1 + rho)
        acc = np.zeros_like(y)
        for j, qj in enumerate(fam.q1):
            if qj != 0.0:
                acc += qj / fam.lead * np.exp(base - (d - 1 - j) * y)
        G += acc * ylk / (1.0 + rho)
    if fam.c != 0.0 and kappa != 0:
        # log^kappa u - d^-kappa log^kappa(P/b_d) = -y^kappa expm1(kappa log1p(delta/y))
        delta = np.log1p(rho) / d
        diff = -ylk * np.expm1(kappa * np.log1p(delta / y))
        G += fam.c * (d + rhop) / (1.0 + rho) * np.exp(base) * diff
    return G, logP


def remainder_integral(fam: _Family, s_values, N: float, config: SeriesConfig = DEFAULT_CONFIG):
    """int_N^inf [phi(u) - closed-form part] du for each s (same real part required).

    Returns (values, error_estimates) arrays.
    """
    s_values = np.atleast_1d(np.asarray(s_values, dtype=complex))
    if not any(v != 0.0 for v in fam.q1) and (fam.c == 0.0 or fam.kappa == 0):
        z = np.zeros(len(s_values), dtype=complex)
        return z, np.zeros(len(s_values))
    sigma = float(s_values[0].real)
    if np.any(s_values.real != sigma):
        out = [remainder_integral(fam, [v], N, config) for v in s_values]
        return np.array([o[0][0] for o in out]), np.array([o[1][0] for o in out])
    d = fam.d
    y0 = math.log(N)
    rate = d * sigma - d + 1.0  # integrand decays like e^(-rate y) up to logs
    if rate <= 0:
        raise DomainError(f"Re s = {sigma} at or left of 1 - 1/d")
    tmax = float(np.max(np.abs(s_values.imag))) if len(s_values) else 0.0
    span = min((40.0 + 3.0 * abs(fam.kappa) * math.log(max(y0, 2.0))) / rate, 700.0 - y0)
    y1 = y0 + span
    # panel width resolves the phase t log P(e^y) ~ t d y and the decay
    width = min(1.0, math.pi / max(tmax * d, 1e-9), max(1.0 / rate, 0.05))
    order = config.panel_order
    npan = int(math.ceil(span / width))
    if npan * order > config.remainder_max_nodes:
        npan = config.remainder_max_nodes // order
    h = span / npan
    xg, wg = gauss_legendre(order)
    y = (y0 + h * (np.arange(npan)[:, None] + 0.5) + 0.5 * h * xg[None, :]).ravel()
    wts = np.tile(0.5 * h * wg, npan)
    G, logP = _remainder_integrand_parts(fam, y, sigma)
    vals = np.empty(len(s_values), dtype=complex)
    for i, t in enumerate(s_values.imag):
        vals[i] = _sum(wts * G * np.exp(-1j * t * logP))
    # tail beyond y1 and a coarse-vs-fine comparison on the first panels
    Gt, _ = _remainder_integrand_parts(fam, np.array([y1]), sigma)
    tail = abs(float(Gt[0])) / rate
    err = np.full(len(s_values), tail + 1e-15 * float(np.sum(np.abs(wts * G))))
    return vals, err


def _series_log1p(g: np.ndarray) -> np.ndarray:
    """Coefficients of log(1 + g(eta)) for g with g[0] = 0 (axis 0 = order)."""
    M = g.shape[0]
    out = np.zeros_like(g)
    one_g = g.copy()
    one_g[0] = one_g[0] + 1.0
    for n in range(1, M):
        acc = n * g[n]
        for k in range(1, n):
            acc = acc - k * out[k] * one_g[n - k]
        out[n] = acc / (n * one_g[0])
    return out


def _series_exp(f: np.ndarray) -> np.ndarray:
    M = f.shape[0]
    out = np.zeros_like(f)
    out[0] = np.exp(f[0])
    for n in range(1, M):
        acc = 0
        for k in range(1, n + 1):
            acc = acc + k * f[k] * out[n - k]
        out[n] = acc / n
    return out


def _shift_poly(coeffs, N: float, M: int) -> np.ndarray:
    """Taylor coefficients in eta of p(N (1 + eta))."""
    out = np.zeros(M)
    for k, b in enumerate(coeffs):
        for j in range(min(k, M - 1) + 1):
            out[j] += b * math.comb(k, j) * N**k
    return out


def phi_taylor(fam: _Family, s_values, N: float, M: int) -> np.ndarray:
    """c_j(s) with phi(N + h) = sum_j c_j h^j, shape (M, len(s))."""
    s_values = np.atleast_1d(np.asarray(s_values, dtype=complex))
    Pn = _shift_poly(fam.P.coefficients, N, M)
    Qn = _shift_poly(fam.q, N, M)
    lp = np.zeros(M)
    lp[0] = math.log(Pn[0])
    g = Pn / Pn[0]
    g[0] = 0.0
    lp[1:] = _series_log1p(g)[1:]
    f = -np.multiply.outer(lp, s_values)  # (M, ns)
    if fam.kappa != 0:
        lu = np.array([math.log(N)] + [(-1.0) ** (j + 1) / j for j in range(1, M)])
        gl = lu / lu[0]
        gl[0] = 0.0
        ll = _series_log1p(gl)
        ll[0] = math.log(lu[0])
        f = f + fam.kappa * ll[:, None]
    E = _series_exp(f)
    out = np.zeros_like(E)
    for j in range(M):
        for k in range(j + 1):
            if Qn[k] != 0.0:
                out[j] += Qn[k] * E[j - k]
    scale = N ** -np.arange(M, dtype=float)
    return out * scale[:, None]


def _em_corrections(fam: _Family, s_values, N: float, kmax: int):
    """Bernoulli corrections -sum_k B_2k/(2k) c_(2k-1)(N), truncated adaptively."""
    M = 2 * kmax + 1
    c = phi_taylor(fam, s_values, N, M)
    B = bernoulli(2 * kmax)
    terms = np.array([B[2 * k] / (2 * k) * c[2 * k - 1] for k in range(1, kmax + 1)])  # (kmax, ns)
    mag = np.abs(terms)
    ns = terms.shape[1]
    total = np.zeros(ns, dtype=complex)
    err = np.zeros(ns)
    used = np.zeros(ns, dtype=int)
    for i in range(ns):
        acc = 0j
        e = mag[-1, i]
        for k in range(kmax):
            if k > 0 and mag[k, i] > mag[k - 1, i]:
                e = mag[k, i]
                break
            acc += terms[k, i]
            used[i] = k + 1
            if mag[k, i] <= 1e-17 * max(abs(acc), 1e-300):
                e = mag[k, i]
                break
        total[i] = -acc
        err[i] = e
    return total, err, c[0], used


def _em_point(fam: _Family, s: complex, N: int, t_floor: float):
    """Smallest admissible Euler-Maclaurin cut N for s."""
    roots = np.roots(np.asarray(fam.P.coefficients)[::-1])
    rmax = float(np.max(np.abs(roots))) if len(roots) else 0.0
    return int(max(N, math.ceil(2 * t_floor + 10), math.ceil(4 * rmax + 10), fam.start + 1))


def _check_continuation_domain(fam: _Family, s: complex):
    d = fam.d
    if s.real <= 1.0 - 1.0 / d:
        raise DomainError(f"Re s = {s.real} at or left of 1 - 1/d = {1 - 1 / d}")
    if s == 1 and fam.c != 0.0:
        raise PoleError("s = 1 is a pole of the continuation")


def euler_maclaurin(spec: DirichletSeriesSpec, s, N: int = 50, config: SeriesConfig = DEFAULT_CONFIG) -> EvaluationResult:
    """sum_{n<N} phi(n) + phi(N)/2 + int_N^inf phi - sum_k B_2k/(2k)! phi^(2k-1)(N)."""
    s = complex(s)
    fam = _family(spec)
    _check_continuation_domain(fam, s)
    n_cut = _em_point(fam, s, N, abs(s))
    n = np.arange(fam.start, n_cut)
    partial = _sum(_phi(fam, n, s))
    corr, cerr, phiN, used = _em_corrections(fam, [s], n_cut, config.em_max_bernoulli)
    main = gamma_term(fam, s, n_cut)
    rem, rerr = remainder_integral(fam, [s], n_cut, config)
    value = partial + 0.5 * complex(phiN[0]) + main + complex(rem[0]) + complex(corr[0])
    err = float(cerr[0] + rerr[0]) + 1e-15 * (abs(partial) + abs(main))
    info = {"N": n_cut, "bernoulli_terms": int(used[0])}
    return EvaluationResult(s, _check_finite(value, "Euler-Maclaurin value"), err, "euler-maclaurin", int(n_cut - fam.start + 1), info)


def _afe_core(fam: _Family, s: complex, x: float, config: SeriesConfig):
    xi = int(math.floor(x))
    if xi < fam.start:
        raise DomainError("x below the first index of the series")
    n = np.arange(fam.start, xi + 1)
    val = _sum(_phi(fam, n, s)) + gamma_term(fam, s, xi)
    if config.afe_endpoint:
        val -= 0.5 * complex(_phi(fam, np.array([xi]), s)[0])
    if config.afe_remainder:
        val += complex(remainder_integral(fam, [s], xi, config)[0][0])
    return val, len(n)


def eval_afe(spec: DirichletSeriesSpec, s, x: float, config: SeriesConfig = DEFAULT_CONFIG) -> EvaluationResult:
    """Truncated sum over n <= x plus the incomplete-Gamma term.

    The error estimate fits C x^-eps on the ladder x/4, x/2, x.
    """
    s = complex(s)
    fam = _family(spec)
    _check_continuation_domain(fam, s)
    if abs(s.imag) > config.delta * x:
        raise DomainError(f"|t| = {abs(s.imag)} exceeds delta * x = {config.delta * x}")
    if s.imag == 0.0 and s.real < 1 and not (fam.kappa >= 0 and fam.kappa == math.floor(fam.kappa)):
        raise DomainError("real s < 1 needs kappa in N_0")
    value, work = _afe_core(fam, s, x, config)
    ladder = [x / 4, x / 2]
    prev = []
    for xx in ladder:
        try:
            prev.append(_afe_core(fam, s, xx, config)[0])
        except (DomainError, ArithmeticError):
            prev.append(None)
    err, eps = _ladder_error(prev[0], prev[1], value)
    info = {"x": x, "eps_fit": eps, "delta": config.delta}
    return EvaluationResult(s, _check_finite(value, "AFE value"), err, "afe", work, info)


def _ladder_error(v4, v2, v1):
    """Error of v1 from the x/4, x/2, x ladder assuming C x^-eps convergence."""
    if v2 is None:
        return math.inf, None
    d2 = abs(v1 - v2)
    if v4 is None:
        return d2, None
    d1 = abs(v2 - v4)
    if d2 == 0.0:
        return 0.0, None
    ratio = d1 / d2
    if ratio <= 1.05:
        return max(d1, d2), None
    eps = math.log2(ratio)
    return d2 / (ratio - 1.0), eps


# ----------------------------------------------------------------------------
# dispatch and vectorized evaluation
# ----------------------------------------------------------------------------


def evaluate(spec: DirichletSeriesSpec, s, method: str = "direct", *, N=None, X=None, x=None, config=DEFAULT_CONFIG):
    method = {"em": "euler-maclaurin"}.get(method, method)
    if method == "direct":
        return eval_direct(spec, s, N)
    if method == "smoothed":
        return eval_smoothed(spec, s, X or 1e4, config=config)
    if method == "afe":
        return eval_afe(spec, s, x or max(1000.0, 4 * abs(complex(s).imag) / config.delta), config)
    if method == "euler-maclaurin":
        return euler_maclaurin(spec, s, N or 50, config)
    raise ValueError(f"unknown method {method!r}")


def evaluate_many(spec, s_values, method="direct", threads: int = 1, **kw) -> list:
    """Evaluate at each s; results in input order regardless of ``threads``."""
    return ordered_map(lambda s: evaluate(spec, s, method, **kw), list(s_values), threads)


def panel_sum(b: np.ndarray, lam: np.ndarray, centers: np.ndarray, offsets: np.ndarray, threads: int = 1, chunk: int = 32) -> np.ndarray:
    """S[p, j] = sum_n b_n exp(-i lam_n (centers_p + offsets_j)).

    One exp per (panel, term) plus a matrix product against the shared
    offset phases; chunks are fixed so results do not depend on ``threads``.
    """
    b = np.asarray(b, dtype=complex)
    lam = np.asarray(lam, dtype=float)
    E = np.exp(-1j * np.multiply.outer(lam, offsets))  # (n, J)
    centers = np.asarray(centers, dtype=float)

    def work(sl):
        A = b[None, :] * np.exp(-1j * np.multiply.outer(centers[sl], lam))
        return A @ E

    parts = ordered_map(work, chunk_slices(len(centers), chunk), threads)
    return np.concatenate(parts, axis=0) if parts else np.zeros((0, len(offsets)), dtype=complex)


def line_panels(
    spec: DirichletSeriesSpec,
    sigma: float,
    centers: np.ndarray,
    offsets: np.ndarray,
    method: str = "smoothed",
    *,
    N=None,
    X=None,
    x=None,
    threads: int = 1,
    config: SeriesConfig = DEFAULT_CONFIG,
    estimate_error: bool = True,
):
    """D(sigma + i(centers_p + offsets_j)) for a panel grid; returns (values, error)."""
    method = {"em": "euler-maclaurin"}.get(method, method)
    centers = np.asarray(centers, dtype=float)
    offsets = np.asarray(offsets, dtype=float)
    t_all = (centers[:, None] + offsets[None, :]).ravel()
    tmax = float(np.max(np.abs(t_all))) if len(t_all) else 0.0
    if method == "direct":
        ab = abscissas(spec)
        if sigma <= ab.sigma_c:
            raise DivergenceError(f"sigma = {sigma} <= sigma_c")
        seq, a = spec.terms(N or spec.count)
        b = a * np.exp(-sigma * seq.lambdas)
        vals = panel_sum(b, seq.lambdas, centers, offsets, threads)
        err = _direct_tail(spec, seq, a, complex(sigma, tmax))
        return vals, err
    if method == "smoothed":
        X = X or 1e4
        seq, a, w = smoothed_weights(spec, X, config)
        b = a * w * np.exp(-sigma * seq.lambdas)
        vals = panel_sum(b, seq.lambdas, centers, offsets, threads)
        k = config.residue_order
        for j in range(1, k + 1):
            bj = a * w * np.exp(-(sigma - j) * seq.lambdas)
            vals = vals - (-1) ** j / (math.factorial(j) * X**j) * panel_sum(bj, seq.lambdas, centers, offsets, threads)
        err = 0.0
        if estimate_error:
            # first neglected residue |S_X(s - k - 1)| / ((k+1)! X^(k+1)) on the same grid
            bk = a * w * np.exp(-(sigma - k - 1) * seq.lambdas)
            shifted = panel_sum(bk, seq.lambdas, centers, offsets, threads)
            err = 2 * float(np.max(np.abs(shifted))) / (math.factorial(k + 1) * X ** (k + 1))
        return vals, err
    fam = _family(spec)
    _check_continuation_domain(fam, complex(sigma, tmax if tmax else 1.0))
    if method == "afe":
        x = x or max(1000.0, tmax / config.delta)
        if tmax > config.delta * x:
            raise DomainError(f"|t| up to {tmax} exceeds delta * x")
        n_cut = int(math.floor(x))
        n = np.arange(fam.start, n_cut + 1)
        endpoint = config.afe_endpoint
    elif method == "euler-maclaurin":
        n_cut = _em_point(fam, complex(sigma, tmax), N or 50, tmax)
        n = np.arange(fam.start, n_cut)
    else:
        raise ValueError(f"unknown method {method!r}")
    nf = n.astype(float)
    lam = np.log(fam.P(nf))
    a = spec.coeff.coefficients(_IndexOnly(n))
    b = a * np.exp(-sigma * lam)
    vals = panel_sum(b, lam, centers, offsets, threads).ravel()
    s_all = sigma + 1j * t_all
    gam = np.array([gamma_term(fam, s, n_cut) for s in s_all])
    phiN = _phi(fam, np.array([float(n_cut)]), s_all)[:, 0]
    if method == "afe":
        vals = vals + gam
        if endpoint:
            vals = vals - 0.5 * phiN
        err = 0.0
    else:
        corr, cerr, _, _ = _em_corrections(fam, s_all, n_cut, config.em_max_bernoulli)
        rem, rerr = _remainder_on_line(fam, sigma, t_all, n_cut, config)
        vals = vals + 0.5 * phiN + gam + corr + rem
        err = float(np.max(cerr + rerr))
    return vals.reshape(len(centers), len(offsets)), err


def _remainder_on_line(fam, sigma, t_all, n_cut, config):
    if not any(v != 0.0 for v in fam.q1) and (fam.c == 0.0 or fam.kappa == 0):
        return np.zeros(len(t_all), dtype=complex), np.zeros(len(t_all))
    return remainder_integral(fam, sigma + 1j * np.asarray(t_all), n_cut, config)


@dataclass
class _IndexOnly:
    natural_index: np.ndarray
