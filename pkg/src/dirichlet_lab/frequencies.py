"""Primes, real polynomials, frequency sequences and gap statistics."""

from __future__ import annotations

import csv
import math
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    CapacityError,
    DomainError,
    NonMonotoneError,
    TableRangeError,
)

CACHE_ENV = "DIRICHLET_LAB_CACHE"
DEFAULT_MEMORY_BUDGET = 1 << 30  # bytes
_PRIME_MAGIC = b"PRMT"
_PRIME_VERSION = 1


# ----------------------------------------------------------------------------
# primes
# ----------------------------------------------------------------------------


@dataclass
class PrimeTable:
    """All primes <= ``limit``, sorted."""

    primes: np.ndarray
    limit: int

    def __len__(self):
        return len(self.primes)

    def pi(self, x) -> int:
        """Number of primes <= x."""
        if x > self.limit:
            raise TableRangeError(f"x = {x} exceeds table limit {self.limit}")
        return int(np.searchsorted(self.primes, x, side="right"))

    def count_between(self, lo, hi) -> int:
        if hi > self.limit:
            raise TableRangeError(f"upper end {hi} exceeds table limit {self.limit}")
        return int(np.searchsorted(self.primes, hi, side="right") - np.searchsorted(self.primes, lo, side="left"))

    def save(self, path) -> None:
        """Flat binary: 16-byte header (magic, version u32, count u64) + int64 LE."""
        data = np.asarray(self.primes, dtype="<i8")
        with open(path, "wb") as fh:
            fh.write(_PRIME_MAGIC + struct.pack("<IQ", _PRIME_VERSION, len(data)))
            fh.write(data.tobytes())

    @classmethod
    def load(cls, path, limit=None) -> "PrimeTable":
        with open(path, "rb") as fh:
            head = fh.read(16)
            if len(head) != 16 or head[:4] != _PRIME_MAGIC:
                raise ValueError(f"{path}: not a prime table")
            version, count = struct.unpack("<IQ", head[4:])
            if version != _PRIME_VERSION:
                raise ValueError(f"{path}: unsupported version {version}")
            data = np.frombuffer(fh.read(8 * count), dtype="<i8")
        if len(data) != count:
            raise ValueError(f"{path}: truncated")
        # the header carries no limit; completeness is only known up to the last entry
        lim = int(data[-1]) if limit is None and count else (limit or 1)
        return cls(data.astype(np.int64), lim)


def _simple_sieve(n: int) -> np.ndarray:
    s = np.ones(n + 1, dtype=bool)
    s[:2] = False
    for i in range(2, math.isqrt(n) + 1):
        if s[i]:
            s[i * i :: i] = False
    return np.flatnonzero(s)


def primes_up_to(limit: int, memory_budget: int = DEFAULT_MEMORY_BUDGET, segment: int = 1 << 21) -> PrimeTable:
    """Segmented sieve of Eratosthenes."""
    limit = int(limit)
    if limit < 2:
        raise DomainError("limit must be >= 2")
    est = 8 * limit / max(math.log(limit) - 1.1, 1.0) + segment
    if est > memory_budget:
        raise CapacityError(f"limit {limit} needs ~{est / 2**20:.0f} MiB, budget {memory_budget / 2**20:.0f} MiB")
    root = math.isqrt(limit)
    base = _simple_sieve(max(root, 2))
    out = []
    for lo in range(0, limit + 1, segment):
        hi = min(lo + segment, limit + 1)
        mark = np.ones(hi - lo, dtype=bool)
        if lo == 0:
            mark[: min(2, hi)] = False
        for p in base:
            p = int(p)
            if p * p >= hi:
                break
            start = max(p * p, -(-lo // p) * p)
            mark[start - lo :: p] = False
        out.append(np.flatnonzero(mark) + lo)
    return PrimeTable(np.concatenate(out).astype(np.int64), limit)


def nth_prime_upper_bound(n: int) -> int:
    if n < 6:
        return 13
    ln = math.log(n)
    return int(n * (ln + math.log(ln))) + 3


def cached_primes(limit: int, memory_budget: int = DEFAULT_MEMORY_BUDGET) -> PrimeTable:
    """``primes_up_to`` backed by the on-disk cache in $DIRICHLET_LAB_CACHE, if set."""
    cache = os.environ.get(CACHE_ENV)
    if not cache:
        return primes_up_to(limit, memory_budget)
    path = Path(cache) / f"primes_{int(limit)}.bin"
    if path.exists():
        return PrimeTable.load(path, limit=int(limit))
    table = primes_up_to(limit, memory_budget)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    table.save(tmp)
    os.replace(tmp, path)
    return table


def first_primes(n: int) -> np.ndarray:
    return cached_primes(nth_prime_upper_bound(n)).primes[:n]


# ----------------------------------------------------------------------------
# polynomials
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class RealPolynomial:
    """P(X) = b_0 + b_1 X + ... + b_d X^d with b_d > 0."""

    coefficients: tuple

    def __post_init__(self):
        c = tuple(float(v) for v in self.coefficients)
        while len(c) > 1 and c[-1] == 0.0:
            c = c[:-1]
        if len(c) < 2:
            raise ValueError("degree must be >= 1")
        if c[-1] <= 0:
            raise ValueError("leading coefficient must be positive (P -> +inf)")
        object.__setattr__(self, "coefficients", c)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def lead(self) -> float:
        return self.coefficients[-1]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        acc = np.full_like(x, self.coefficients[-1])
        for b in reversed(self.coefficients[:-1]):
            acc = acc * x + b
        return acc if acc.ndim else float(acc)

    def derivative(self) -> tuple:
        """Coefficients of P' (ascending)."""
        return tuple(k * b for k, b in enumerate(self.coefficients) if k > 0)

    def eval_derivative(self, x):
        d = self.derivative()
        x = np.asarray(x, dtype=float)
        acc = np.full_like(x, d[-1])
        for b in reversed(d[:-1]):
            acc = acc * x + b
        return acc if acc.ndim else float(acc)

    @property
    def x0(self) -> float:
        """Largest real critical point plus one (-inf when P' has no real root)."""
        return _bijectivity_threshold(self.coefficients)

    @property
    def y0(self) -> float:
        x0 = self.x0
        return -math.inf if x0 == -math.inf else float(self(x0))

    def to_list(self) -> list:
        return list(self.coefficients)


_X0_CACHE: dict = {}


def _bijectivity_threshold(coeffs: tuple) -> float:
    if coeffs in _X0_CACHE:
        return _X0_CACHE[coeffs]
    d = [k * b for k, b in enumerate(coeffs) if k > 0]
    if len(d) == 1:
        x0 = -math.inf
    else:
        roots = np.roots(d[::-1])
        real = [r.real for r in roots if abs(r.imag) <= 1e-9 * max(1.0, abs(r))]
        x0 = max(real) + 1.0 if real else -math.inf
    _X0_CACHE[coeffs] = x0
    return x0


def poly_inverse(P: RealPolynomial, y: float) -> float:
    """The x >= x0 with P(x) = y (safeguarded Newton with bisection fallback)."""
    y = float(y)
    if y < P.y0:
        raise DomainError(f"y = {y!r} below the bijectivity threshold {P.y0!r}")
    x0 = P.x0
    guess = (max(y, 0.0) / P.lead) ** (1.0 / P.degree)
    if x0 == -math.inf:
        lo = min(-1.0, -guess)
        step = 1.0
        while P(lo) > y:
            step *= 2.0
            lo -= step
    else:
        lo = x0
    hi = max(lo + 1.0, guess + 1.0)
    while P(hi) < y:
        hi = lo + 2.0 * (hi - lo)
    x = min(max(guess, lo), hi)
    tol = 4e-16 * max(abs(y), 1.0)
    for _ in range(200):
        fx = P(x) - y
        if abs(fx) <= tol:
            return x
        if fx < 0:
            lo = x
        else:
            hi = x
        dfx = P.eval_derivative(x)
        nx = x - fx / dfx if dfx != 0 else 0.5 * (lo + hi)
        if not (lo < nx < hi):
            nx = 0.5 * (lo + hi)
        if nx == x or hi - lo <= 2e-16 * max(abs(hi), 1.0):
            return nx
        x = nx
    return x


# ----------------------------------------------------------------------------
# frequency sequences
# ----------------------------------------------------------------------------

GENERATORS = ("primes", "integers", "explicit")


@dataclass
class FrequencySequence:
    """Strictly increasing frequencies lambda_1 < ... < lambda_N.

    ``arguments`` holds p_n (primes), m (integers) or None; ``natural_index``
    is the index used by coefficient models: the prime index n for
    ``primes``, the integer m itself for ``integers``, 1..N for ``explicit``.
    ``offset`` counts leading indices dropped because P was not yet positive
    and increasing there. ``next_lambda`` is lambda_{N+1} (inf if none).
    """

    generator: str
    lambdas: np.ndarray
    exp_lambdas: np.ndarray
    natural_index: np.ndarray
    poly: RealPolynomial | None = None
    arguments: np.ndarray | None = None
    offset: int = 0
    next_lambda: float = math.inf
    next_exp_lambda: float = math.inf
    gap_floor: tuple | None = field(default=None, repr=False)

    def __len__(self):
        return len(self.lambdas)

    @property
    def gaps(self) -> np.ndarray:
        """theta_n = min(lambda_n - lambda_{n-1}, lambda_{n+1} - lambda_n), one-sided at the ends."""
        lam = self.lambdas
        right = np.diff(np.append(lam, self.next_lambda))
        left = np.concatenate(([np.inf], np.diff(lam)))
        return np.minimum(left, right)

    def prefix(self, n: int) -> "FrequencySequence":
        if n > len(self):
            raise ValueError("prefix longer than sequence")
        if n == len(self):
            return self
        return FrequencySequence(
            self.generator,
            self.lambdas[:n],
            self.exp_lambdas[:n],
            self.natural_index[:n],
            self.poly,
            None if self.arguments is None else self.arguments[:n],
            self.offset,
            float(self.lambdas[n]),
            float(self.exp_lambdas[n]),
        )

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["index", "lambda", "gap"])
            for i, lam, g in zip(self.natural_index, self.lambdas, self.gaps):
                w.writerow([int(i), repr(float(lam)), repr(float(g))])

    def descriptor(self) -> dict:
        return {
            "generator": self.generator,
            "poly": None if self.poly is None else self.poly.to_list(),
            "count": len(self),
            "offset": self.offset,
        }


def _admissible_start(P: RealPolynomial, args: np.ndarray) -> int:
    vals = P(args)
    ok = (vals > 0) & (args >= P.x0)
    bad = np.flatnonzero(~ok)
    return 0 if len(bad) == 0 else int(bad[-1]) + 1


def lambda_values(gen: str, P=None, N: int = 0, values=None) -> FrequencySequence:
    """First N frequencies log P(p_n) (``primes``), log P(m), m >= 2 (``integers``),
    or an explicit strictly increasing list."""
    if gen == "explicit":
        lam = np.asarray(values, dtype=float)
        if lam.ndim != 1 or len(lam) == 0:
            raise ValueError("explicit frequencies must be a non-empty list")
        if np.any(np.diff(lam) <= 0):
            raise NonMonotoneError("explicit frequencies must be strictly increasing")
        with np.errstate(over="ignore"):
            ex = np.exp(lam)
        return FrequencySequence("explicit", lam, ex, np.arange(1, len(lam) + 1))
    if gen not in GENERATORS:
        raise ValueError(f"unknown generator {gen!r}")
    if not isinstance(P, RealPolynomial):
        P = RealPolynomial(tuple(P) if P is not None else (0.0, 1.0))
    N = int(N)
    if N < 1:
        raise ValueError("N must be >= 1")
    extra = 8
    while True:
        count = N + 1 + extra
        if gen == "primes":
            args = first_primes(count).astype(float)
            natural = np.arange(1, count + 1)
        else:
            args = np.arange(2, count + 2, dtype=float)
            natural = args.astype(np.int64)
        start = _admissible_start(P, args)
        if start + N + 1 <= count:
            break
        extra = 2 * extra + start
    sl = slice(start, start + N + 1)
    args, natural = args[sl], natural[sl]
    ex = P(args)
    lam = np.log(ex)
    if np.any(np.diff(lam) <= 0):
        k = int(np.flatnonzero(np.diff(lam) <= 0)[0])
        raise NonMonotoneError(f"P not increasing between arguments {args[k]:g} and {args[k + 1]:g}")
    return FrequencySequence(
        gen,
        lam[:N],
        ex[:N],
        natural[:N],
        P,
        args[:N],
        start,
        float(lam[N]),
        float(ex[N]),
    )


def lambda_values_upto(gen: str, P, lam_max: float) -> FrequencySequence:
    """Frequencies of the generator with lambda_n <= lam_max (at least one term)."""
    if not isinstance(P, RealPolynomial):
        P = RealPolynomial(tuple(P))
    arg_max = poly_inverse(P, math.exp(lam_max)) if math.exp(lam_max) >= P.y0 else 2.0
    if gen == "primes":
        n = cached_primes(max(int(arg_max) + 1, 2)).pi(max(int(arg_max) + 1, 2))
    else:
        n = max(int(arg_max) - 1, 1)
    seq = lambda_values(gen, P, max(n, 1) + 2)
    k = int(np.searchsorted(seq.lambdas, lam_max, side="right"))
    return seq.prefix(max(k, 1))


@dataclass(frozen=True)
class GapCertificate:
    """theta_n >= c exp(-beta lambda_n) on the cached prefix; ``witness`` is the
    1-based position attaining the minimum."""

    c: float
    beta: float
    witness: int
    beta_from_spacing: bool


def gap_certificate(seq: FrequencySequence) -> GapCertificate:
    if len(seq) < 3:
        raise ValueError("need at least 3 frequencies")
    theta = seq.gaps
    lam = seq.lambdas
    ex = np.append(seq.exp_lambdas, seq.next_exp_lambda)
    spacing_ok = bool(np.all(np.diff(ex)[np.isfinite(np.diff(ex))] >= 1.0))
    if spacing_ok:
        beta = 1.0
    else:
        slope = np.polyfit(lam, np.log(theta), 1)[0]
        beta = max(0.0, -float(slope))
    scaled = theta * np.exp(beta * lam)
    k = int(np.argmin(scaled))
    return GapCertificate(float(scaled[k]), beta, k + 1, spacing_ok)


def prime_interval_count(x: float, alpha: float, P=None, table: PrimeTable | None = None) -> int:
    """Number of primes p with log P(p) in [x, x + alpha/x^2]."""
    if P is None:
        P = RealPolynomial((0.0, 1.0))
    elif not isinstance(P, RealPolynomial):
        P = RealPolynomial(tuple(P))
    x = float(x)
    top = x + alpha / (x * x)
    y_lo, y_hi = math.exp(x), math.exp(top)
    if y_lo < P.y0:
        raise DomainError(f"x = {x} is below the bijectivity range of P")
    lo = poly_inverse(P, y_lo)
    hi = poly_inverse(P, y_hi)
    slack = 1e-9 * max(1.0, hi)
    if table is None:
        table = cached_primes(max(int(hi + slack) + 2, 2))
    if hi + slack > table.limit:
        raise TableRangeError(f"interval end {hi:.6g} exceeds prime table limit {table.limit}")
    i0 = int(np.searchsorted(table.primes, lo - slack, side="left"))
    i1 = int(np.searchsorted(table.primes, hi + slack, side="right"))
    cand = table.primes[i0:i1].astype(float)
    lam = np.log(P(cand)) if len(cand) else cand
    eps = 1e-13 * max(1.0, abs(x))
    return int(np.count_nonzero((lam >= x - eps) & (lam <= top + eps)))
