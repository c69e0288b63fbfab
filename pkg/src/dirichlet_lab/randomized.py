"""Randomized prime zeta P_X and Euler product zeta_X with Steinhaus or
Rademacher coefficients."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ZeroFactorError
from .frequencies import first_primes
from .numerics import chunk_slices, ordered_map, panel_nodes

KINDS = ("steinhaus", "rademacher", "deterministic")
_TWO53 = 2.0**-53


@dataclass(frozen=True)
class RandomSignModel:
    """Unimodular i.i.d. signs from a Philox4x64 stream keyed by ``seed``.

    Raw output k (0-based) gives coefficient X_(k+1): Steinhaus uses the top
    53 bits as a uniform angle, Rademacher the top bit as the sign.
    ``deterministic`` (all ones) is a contrast model, not random.
    """

    kind: str = "steinhaus"
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown model {self.kind!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def raw(self, start: int, count: int) -> np.ndarray:
        """Raw 64-bit outputs start .. start+count-1, without generating the prefix."""
        bg = np.random.Philox(key=int(self.seed))
        bg.advance(start // 4)
        skip = start % 4
        return bg.random_raw(count + skip)[skip:].astype(np.uint64)

    def _map(self, raw: np.ndarray) -> np.ndarray:
        if self.kind == "rademacher":
            return np.where((raw >> np.uint64(63)) == 1, -1.0, 1.0)
        if self.kind == "deterministic":
            return np.ones(len(raw))
        u = (raw >> np.uint64(11)).astype(np.float64) * _TWO53
        ang = 2.0 * np.pi * u
        return np.cos(ang) + 1j * np.sin(ang)

    def sample(self, N: int, start: int = 0, threads: int = 1, chunk: int = 1 << 16) -> np.ndarray:
        """X_(start+1) .. X_(start+N); chunks are independent so threads do not change values."""
        if N < 1:
            raise ValueError("N must be >= 1")
        parts = ordered_map(lambda sl: self._map(self.raw(start + sl.start, sl.stop - sl.start)), chunk_slices(N, chunk), threads)
        return np.concatenate(parts)

    def coefficient(self, k: int):
        """X_k (1-based) computed directly from the counter."""
        return self._map(self.raw(k - 1, 1))[0]


def sample(model: RandomSignModel, N: int) -> np.ndarray:
    return model.sample(N)


@dataclass
class RandomSeriesInstance:
    model: RandomSignModel
    N: int
    coefficients: np.ndarray = field(repr=False)
    primes: np.ndarray = field(repr=False)

    @classmethod
    def create(cls, model: RandomSignModel, N: int, threads: int = 1) -> "RandomSeriesInstance":
        return cls(model, int(N), model.sample(int(N), threads=threads), first_primes(int(N)).astype(float))

    @property
    def lambdas(self) -> np.ndarray:
        return np.log(self.primes)

    def spec(self):
        """The DirichletSeriesSpec with lambda_n = log p_n and these coefficients."""
        from .series import CoefficientModel, DirichletSeriesSpec

        if self.model.kind == "deterministic":
            coeff = CoefficientModel("list", values=tuple(self.coefficients))
            return DirichletSeriesSpec("primes", coeff, count=self.N)
        return DirichletSeriesSpec("primes", CoefficientModel("random", random_kind=self.model.kind, seed=self.model.seed), count=self.N)

    def digest(self) -> dict:
        head = np.asarray(self.coefficients[:64], dtype=complex)
        h = hashlib.sha256()
        h.update(f"{self.model.kind}:{self.model.seed}:{self.N}".encode())
        h.update(head.tobytes())
        return {"seed": int(self.model.seed), "kind": self.model.kind, "N": self.N, "hash64": h.hexdigest()[:16]}

    def terms(self, s, N: int | None = None) -> np.ndarray:
        """z_n = X_n p_n^-s for n <= N."""
        N = self.N if N is None else int(N)
        if N > self.N:
            raise ValueError(f"instance has only {self.N} coefficients")
        return self.coefficients[:N] * np.exp(-complex(s) * self.lambdas[:N])


def log1m(z) -> np.ndarray:
    """Principal log(1 - z), accurate for small |z|."""
    z = np.asarray(z, dtype=complex)
    x, y = z.real, z.imag
    with np.errstate(divide="ignore"):
        # 1 - x is exact for x > 1/2, where the log1p form cancels
        mod = np.where(x > 0.5, np.log(np.hypot(1.0 - x, y)), 0.5 * np.log1p(-2.0 * x + x * x + y * y))
    return mod + 1j * np.arctan2(-y, 1.0 - x)


def _fsum(v) -> complex:
    v = np.asarray(v, dtype=complex)
    return complex(math.fsum(v.real), math.fsum(v.imag))


def _check_half_plane(s: complex, margin: float = 0.0):
    if s.real <= 0.5 + margin:
        raise DomainError(f"Re s = {s.real} must exceed 1/2")


def prime_zeta(instance: RandomSeriesInstance, s, N: int | None = None) -> complex:
    """P_X(s) truncated to N primes."""
    return _fsum(instance.terms(s, N))


def log_euler_product(instance: RandomSeriesInstance, s, N: int | None = None) -> complex:
    """sum_n -log(1 - X_n p_n^-s), principal branch per factor."""
    s = complex(s)
    _check_half_plane(s)
    z = instance.terms(s, N)
    gap = np.abs(1.0 - z)
    if np.any(gap < 1e-14):
        k = int(np.argmin(gap))
        raise ZeroFactorError(f"factor {k + 1} vanishes: |1 - X p^-s| = {gap[k]:.3g}")
    return -_fsum(log1m(z))


def euler_product(instance: RandomSeriesInstance, s, N: int | None = None) -> complex:
    """prod_{n <= N} 1 / (1 - X_n p_n^-s)."""
    return complex(np.exp(log_euler_product(instance, s, N)))


def correction_terms(z: np.ndarray) -> np.ndarray:
    """F_n = sum_{k >= 2} z_n^k / k, summed until the terms are below 1e-18 relative."""
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) >= 1):
        raise DomainError("correction series needs |X_n p_n^-s| < 1")
    pw = z * z
    acc = pw / 2
    k = 2
    while True:
        k += 1
        pw = pw * z
        acc = acc + pw / k
        if np.all(np.abs(pw) <= 1e-18 * np.maximum(np.abs(acc), 1e-300)) or k > 4000:
            return acc


def correction_series(instance: RandomSeriesInstance, s, N: int | None = None) -> complex:
    """F(s) = sum_n sum_{k>=2} X_n^k p_n^(-ks) / k, truncated to N primes."""
    s = complex(s)
    _check_half_plane(s)
    return _fsum(correction_terms(instance.terms(s, N)))


def correction_tail_bound(instance: RandomSeriesInstance, s, N: int | None = None) -> float:
    """Bound for the omitted primes: sum_{p > p_N} p^(-2 sigma) / (1 - p^-sigma), by an integral."""
    sigma = complex(s).real
    N = instance.N if N is None else int(N)
    p = float(instance.primes[N - 1])
    # sum over primes <= sum over integers
    return p ** (1 - 2 * sigma) / (2 * sigma - 1) / (1 - p**-sigma)


@dataclass
class DoublingCheck:
    N: int
    drift: float
    tail_sd: float
    ratio: float


def doubling_check(instance: RandomSeriesInstance, s, N: int) -> DoublingCheck:
    """|log zeta_X at 2N - log zeta_X at N| against the tail standard deviation
    sqrt(sum_{N < n <= 2N} p_n^(-2 sigma)) of the random model."""
    s = complex(s)
    if 2 * N > instance.N:
        raise ValueError(f"instance needs at least {2 * N} coefficients")
    drift = abs(log_euler_product(instance, s, 2 * N) - log_euler_product(instance, s, N))
    sd = math.sqrt(math.fsum(instance.primes[N : 2 * N] ** (-2 * s.real)))
    return DoublingCheck(N, drift, sd, drift / sd)


@dataclass
class IdentityCheck:
    per_prime_max: float
    total_residual: float
    log_zeta: complex
    prime_zeta: complex
    correction: complex


def identity_check(instance: RandomSeriesInstance, s, N: int | None = None) -> IdentityCheck:
    """log zeta_X - P_X - F at one truncation, per prime and in total."""
    s = complex(s)
    _check_half_plane(s)
    z = instance.terms(s, N)
    lz = -log1m(z)
    F = correction_terms(z)
    per = np.abs(lz - z - F)
    LZ, PX, FX = -_fsum(log1m(z)), _fsum(z), _fsum(F)
    return IdentityCheck(float(np.max(per)), abs(LZ - PX - FX), LZ, PX, FX)


@dataclass
class OrderFit:
    sigma: float
    exponent: float
    target: float
    slack: float
    passed: bool
    t_grid: list
    envelope: list
    residuals: list
    note: str = "slack 0.5 is a desk-scale convention"


def prime_zeta_line(instance: RandomSeriesInstance, sigma: float, t: np.ndarray, threads: int = 1) -> np.ndarray:
    from .series import panel_sum

    b = instance.coefficients * np.exp(-sigma * instance.lambdas)
    return panel_sum(b, instance.lambdas, np.asarray(t, dtype=float), np.zeros(1), threads)[:, 0]


def order_fit(instance: RandomSeriesInstance, sigma: float, t_grid, slack: float = 0.5, threads: int = 1) -> OrderFit:
    """Slope of log(running max |P_X(sigma + it)|) against log log t.

    The envelope at t_k is the max over [t_(k-1), t_k] sampled at pi/(4 lambda_N).
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if not (0.5 < sigma < 1.0):
        raise DomainError("sigma must lie in (1/2, 1)")
    if len(t_grid) < 3 or np.any(np.diff(t_grid) <= 0) or t_grid[0] <= math.e:
        raise ValueError("t grid must be increasing, > e, with at least 3 points")
    step = math.pi / (4 * float(instance.lambdas[-1]))
    width = step * 16
    c, o, _ = panel_nodes(float(t_grid[0]) / 2, float(t_grid[-1]), width, 16)
    from .series import panel_sum

    b = instance.coefficients * np.exp(-sigma * instance.lambdas)
    vals = np.abs(panel_sum(b, instance.lambdas, c, o, threads)).ravel()
    tt = (c[:, None] + o[None, :]).ravel()
    env = []
    lo = float(t_grid[0]) / 2
    for hi in t_grid:
        m = (tt >= lo) & (tt <= hi)
        env.append(float(np.max(vals[m])) if np.any(m) else 0.0)
    # running maximum: a sup-type bound
    env = np.maximum.accumulate(np.asarray(env))
    x = np.log(np.log(t_grid))
    y = np.log(np.maximum(env, 1e-300))
    coef = np.polyfit(x, y, 1)
    res = y - np.polyval(coef, x)
    target = 2 - 2 * sigma
    expo = float(coef[0])
    return OrderFit(sigma, expo, target, slack, expo <= target + slack, t_grid.tolist(), env.tolist(), res.tolist())


__all__ = [
    "DoublingCheck",
    "IdentityCheck",
    "OrderFit",
    "RandomSeriesInstance",
    "RandomSignModel",
    "correction_series",
    "correction_tail_bound",
    "correction_terms",
    "doubling_check",
    "euler_product",
    "identity_check",
    "log1m",
    "log_euler_product",
    "order_fit",
    "prime_zeta",
    "prime_zeta_line",
    "sample",
]
