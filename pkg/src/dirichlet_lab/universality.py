"""Vertical-translate scanning: sup-norm distances, good-tau densities and
Kronecker alignment witnesses."""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .config import ScanConfig
from .errors import NotFoundError, ResolutionError
from .numerics import chunk_slices, ordered_map
from .series import DirichletSeriesSpec, abscissas, line_panels, smoothed_weights

TARGET_KINDS = ("polynomial", "exp-polynomial", "translate", "constant", "dirichlet-polynomial")


def default_strip(spec: DirichletSeriesSpec) -> tuple:
    """Left/right edges of the universality strip used for grid validation."""
    d = spec.degree
    if spec.coeff.kind == "alternating" and spec.generator == "primes":
        return (1.0 - 1.0 / (3 * d), 1.0)
    if spec.is_poly_log_family:
        return (1.0 - 1.0 / (2 * d), 1.0)
    ab = abscissas(spec)
    return (ab.sigma_2, max(ab.sigma_a, ab.sigma_2))


@dataclass(frozen=True)
class CompactGrid:
    """Rectangle [sigma_lo, sigma_hi] x [t_lo, t_hi] sampled with spacing <= h."""

    sigma_lo: float
    sigma_hi: float
    t_lo: float
    t_hi: float
    h: float

    def __post_init__(self):
        if not (self.sigma_lo <= self.sigma_hi and self.t_lo <= self.t_hi and self.h > 0):
            raise ValueError("invalid rectangle")

    @property
    def sigmas(self) -> np.ndarray:
        return _axis(self.sigma_lo, self.sigma_hi, self.h)

    @property
    def ts(self) -> np.ndarray:
        return _axis(self.t_lo, self.t_hi, self.h)

    @property
    def points(self) -> np.ndarray:
        return (self.sigmas[:, None] + 1j * self.ts[None, :]).ravel()

    @property
    def spacing(self) -> float:
        s, t = self.sigmas, self.ts
        hs = s[1] - s[0] if len(s) > 1 else 0.0
        ht = t[1] - t[0] if len(t) > 1 else 0.0
        return max(hs, ht)

    def refine(self, factor: int) -> "CompactGrid":
        return CompactGrid(self.sigma_lo, self.sigma_hi, self.t_lo, self.t_hi, self.h / factor)

    def check_strip(self, strip: tuple) -> None:
        lo, hi = strip
        if not (self.sigma_lo > lo and self.sigma_hi < hi):
            raise ValueError(f"rectangle sigma range [{self.sigma_lo}, {self.sigma_hi}] not inside strip ({lo}, {hi})")


def _axis(a, b, h):
    n = max(1, int(math.ceil((b - a) / h - 1e-12)))
    return np.linspace(a, b, n + 1) if b > a else np.array([a])


@dataclass
class TargetFunction:
    """f(s) on K. ``params``: coeffs (ascending, polynomial / exp-polynomial),
    value (constant), tau0 (translate), coeffs + lambdas (dirichlet-polynomial)."""

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in TARGET_KINDS:
            raise ValueError(f"unknown target kind {self.kind!r}")

    @property
    def nonvanishing(self) -> bool:
        if self.kind == "exp-polynomial":
            return True
        if self.kind == "constant":
            return complex(self.params.get("value", 0)) != 0
        return False

    def evaluate_rows(self, sigmas, ts, spec=None, evaluator=None) -> np.ndarray:
        """Values on the grid sigmas x ts, shape (len(sigmas), len(ts))."""
        S = sigmas[:, None] + 1j * ts[None, :]
        k = self.kind
        if k == "constant":
            return np.full(S.shape, complex(self.params.get("value", 0)))
        if k in ("polynomial", "exp-polynomial"):
            c = np.asarray(self.params.get("coeffs", [0]), dtype=complex)
            p = np.polynomial.polynomial.polyval(S, c)
            return np.exp(p) if k == "exp-polynomial" else p
        if k == "dirichlet-polynomial":
            a = np.asarray(self.params["coeffs"], dtype=complex)
            lam = np.asarray(self.params["lambdas"], dtype=float)
            return np.tensordot(np.exp(-np.multiply.outer(S, lam)), a, axes=([-1], [0]))
        # translate: through the same evaluator as the scan so an on-grid tau0 matches exactly
        tau0 = float(self.params["tau0"])
        return np.stack([evaluator(sig, np.array([tau0]), ts)[0] for sig in sigmas])

    def to_dict(self) -> dict:
        p = {k: ([[complex(v).real, complex(v).imag] for v in val] if k == "coeffs" else val) for k, val in self.params.items()}
        if "value" in p:
            v = complex(p["value"])
            p["value"] = [v.real, v.imag]
        return {"kind": self.kind, "params": p}

    @classmethod
    def from_dict(cls, d: dict) -> "TargetFunction":
        p = dict(d.get("params", {}))
        if "coeffs" in p:
            p["coeffs"] = [complex(*v) if isinstance(v, (list, tuple)) else complex(v) for v in p["coeffs"]]
        if "value" in p:
            v = p["value"]
            p["value"] = complex(*v) if isinstance(v, (list, tuple)) else complex(v)
        return cls(d["kind"], p)


@dataclass
class Evaluator:
    """D(sigma + i(tau + t)) on panel grids for one evaluation path."""

    spec: DirichletSeriesSpec
    method: str = "smoothed"
    X: float | None = 5000.0
    N: int | None = None
    x: float | None = None
    threads: int = 1

    def __call__(self, sigma, taus, ts):
        vals, _ = line_panels(self.spec, sigma, taus, ts, self.method, X=self.X, N=self.N, x=self.x, estimate_error=False)
        return vals

    def error_floor(self, K: "CompactGrid", tau: float = 0.0) -> float:
        """Largest path error estimate over K + i tau."""
        return max(
            float(line_panels(self.spec, s, np.array([tau]), K.ts, self.method, X=self.X, N=self.N, x=self.x)[1]) for s in K.sigmas
        )

    def max_frequency(self) -> float:
        if self.method == "smoothed":
            seq, _, _ = smoothed_weights(self.spec, self.X)
            return float(seq.lambdas[-1])
        if self.method == "direct":
            seq, _ = self.spec.terms(self.N or self.spec.count)
            return float(seq.lambdas[-1])
        n = self.x if self.method == "afe" else max(self.N or 50, 50)
        return float(np.log(self.spec.poly(float(n))))


def _distances(ev: Evaluator, f: TargetFunction, K: CompactGrid, taus: np.ndarray, fvals=None):
    """(grid max, continuity margin) per tau."""
    sig, ts = K.sigmas, K.ts
    if fvals is None:
        fvals = f.evaluate_rows(sig, ts, ev.spec, ev)
    G = np.stack([ev(s, taus, ts) - fvals[i][None, :] for i, s in enumerate(sig)], axis=1)  # (tau, sigma, t)
    mod = np.abs(G)
    grid_max = mod.reshape(len(taus), -1).max(axis=1)
    L = np.zeros(len(taus))
    if len(ts) > 1:
        L = np.maximum(L, (np.abs(np.diff(G, axis=2)) / np.diff(ts)[None, None, :]).reshape(len(taus), -1).max(axis=1))
    if len(sig) > 1:
        L = np.maximum(L, (np.abs(np.diff(G, axis=1)) / np.diff(sig)[None, :, None]).reshape(len(taus), -1).max(axis=1))
    margin = L * K.spacing / math.sqrt(2.0)
    return grid_max, margin


def sup_distance(spec, f: TargetFunction, K: CompactGrid, tau: float, evaluator: Evaluator | None = None, with_parts=False):
    """max_K |D(s + i tau) - f(s)| on the grid plus a Lipschitz continuity margin."""
    ev = evaluator or Evaluator(spec)
    g, m = _distances(ev, f, K, np.array([float(tau)]))
    if with_parts:
        return float(g[0] + m[0]), float(g[0]), float(m[0])
    return float(g[0] + m[0])


def validate_margin(spec, f, K: CompactGrid, tau: float, evaluator=None, oversample: int = 4) -> dict:
    """Compare the coarse bound with a grid refined ``oversample`` times."""
    ev = evaluator or Evaluator(spec)
    total, gmax, margin = sup_distance(spec, f, K, tau, ev, with_parts=True)
    fine = sup_distance(spec, f, K.refine(oversample), tau, ev, with_parts=True)
    return {"coarse": gmax, "margin": margin, "bound": total, "fine": fine[1], "ok": fine[1] <= total + 1e-12}


@dataclass
class TauScanReport:
    epsilon: float
    T: float
    dtau: float
    good_measure: float
    ldens_estimate: float
    best_tau: float
    best_error: float
    window_edges: list
    window_measure: list
    n_tau: int
    error_floor: float
    inconclusive: bool
    distances: list = field(default_factory=list, repr=False)

    def to_dict(self, with_distances: bool = False) -> dict:
        d = asdict(self)
        if not with_distances:
            d.pop("distances")
        return d

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["tau", "sup_distance"])
            for k, v in enumerate(self.distances):
                w.writerow([repr(k * self.dtau), repr(float(v))])


def tau_scan(
    spec: DirichletSeriesSpec,
    f: TargetFunction,
    K: CompactGrid,
    epsilon: float,
    T: float,
    dtau: float,
    evaluator: Evaluator | None = None,
    windows: int = 10,
    threads: int = 1,
    config: ScanConfig = ScanConfig(),
) -> TauScanReport:
    """Scan tau_k = k dtau, k < T/dtau, for sup_K |D(s + i tau) - f(s)| < epsilon."""
    ev = evaluator or Evaluator(spec, threads=threads)
    lam_max = ev.max_frequency()
    if dtau > math.pi / (4 * lam_max):
        raise ResolutionError(f"dtau = {dtau} exceeds pi/(4 lambda_N) = {math.pi / (4 * lam_max):.4g}")
    n = int(round(T / dtau))
    taus = np.arange(n) * dtau
    fvals = f.evaluate_rows(K.sigmas, K.ts, spec, ev)

    def work(sl):
        g, m = _distances(ev, f, K, taus[sl], fvals)
        return g + m

    dist = np.concatenate(ordered_map(work, chunk_slices(n, config.chunk), threads))
    good = dist < epsilon
    measure = float(np.count_nonzero(good)) * dtau
    k = int(np.argmin(dist))
    edges = np.linspace(0.0, n * dtau, windows + 1)
    idx = np.minimum((taus // (n * dtau / windows)).astype(int), windows - 1)
    win = np.bincount(idx[good], minlength=windows) * dtau
    floor = ev.error_floor(K, float(taus[k]))
    return TauScanReport(
        epsilon,
        T,
        dtau,
        measure,
        measure / (n * dtau) if n else 0.0,
        float(taus[k]),
        float(dist[k]),
        edges.tolist(),
        win.tolist(),
        n,
        floor,
        inconclusive=measure == 0.0,
        distances=dist.tolist(),
    )


# ----------------------------------------------------------------------------
# Kronecker alignment
# ----------------------------------------------------------------------------


def phase_error(lams, targets, tau) -> np.ndarray:
    """max_j dist(lambda_j tau - phi_j, 2 pi Z) for each tau."""
    lams = np.asarray(lams, dtype=float)
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    d = np.multiply.outer(tau, lams) - np.asarray(targets, dtype=float)
    r = np.remainder(d, 2 * np.pi)
    return np.minimum(r, 2 * np.pi - r).max(axis=1)


def kronecker_witness(freqs, target_phases, tol: float, T: float, chunk: int = 1 << 18) -> float:
    """Smallest-found tau in [0, T] aligning (lambda_j tau) with the targets mod 2 pi."""
    lams = np.asarray(freqs, dtype=float)
    phis = np.asarray(target_phases, dtype=float)
    m = len(lams)
    if m == 0 or m > 6:
        raise ValueError("need 1 <= m <= 6 frequencies")
    if m == 1:
        tau = float(np.remainder(phis[0], 2 * np.pi) / lams[0])
        if tau <= T:
            return tau
        raise NotFoundError("no tau in [0, T]", tau, 0.0)
    step = tol / (2 * float(np.max(np.abs(lams))))
    n = int(math.floor(T / step)) + 1
    best_tau, best_err = 0.0, math.inf
    for lo in range(0, n, chunk):
        tau = np.arange(lo, min(lo + chunk, n)) * step
        err = phase_error(lams, phis, tau)
        hits = np.flatnonzero(err < tol)
        for h in hits:
            t_ref, e_ref = _refine(lams, phis, float(tau[h]), step, T)
            if e_ref < tol:
                return t_ref
        k = int(np.argmin(err))
        if err[k] < best_err:
            best_tau, best_err = float(tau[k]), float(err[k])
        # near-misses: a coarse point within one step of a good tau is off by <= lambda_max step
        near = np.flatnonzero(err < tol + tol / 2)
        for h in near:
            t_ref, e_ref = _refine(lams, phis, float(tau[h]), step, T)
            if e_ref < tol:
                return t_ref
            if e_ref < best_err:
                best_tau, best_err = t_ref, e_ref
    raise NotFoundError(f"no tau in [0, {T}] within tolerance {tol}", best_tau, best_err)


def _refine(lams, phis, tau, step, T):
    """Dense local search around tau."""
    grid = np.clip(tau + np.linspace(-step, step, 65), 0.0, T)
    err = phase_error(lams, phis, grid)
    k = int(np.argmin(err))
    return float(grid[k]), float(err[k])


def kronecker_oracle(freqs, target_phases, tol: float, T: float):
    """Independent check: align the first coordinate exactly, tau = (phi_1 + 2 pi k) / lambda_1,
    and test the rest. Returns the first such tau or None."""
    lams = np.asarray(freqs, dtype=float)
    phis = np.asarray(target_phases, dtype=float)
    kmax = int(T * lams[0] / (2 * np.pi)) + 1
    tau = (np.remainder(phis[0], 2 * np.pi) + 2 * np.pi * np.arange(kmax + 1)) / lams[0]
    tau = tau[tau <= T]
    err = phase_error(lams, phis, tau)
    hits = np.flatnonzero(err < tol)
    return float(tau[hits[0]]) if len(hits) else None


def phase_target(spec: DirichletSeriesSpec, phases, m: int = 3) -> TargetFunction:
    """Dirichlet polynomial sum_j a_j e^(-i phi_j) e^(-lambda_j s) over the first m terms:
    D_m(s + i tau) equals it whenever lambda_j tau = phi_j mod 2 pi."""
    seq, a = spec.terms(m)
    coeffs = [complex(a[j]) * complex(math.cos(phases[j]), -math.sin(phases[j])) for j in range(m)]
    return TargetFunction("dirichlet-polynomial", {"coeffs": coeffs, "lambdas": seq.lambdas[:m].tolist()})


__all__ = [
    "CompactGrid",
    "Evaluator",
    "TargetFunction",
    "TauScanReport",
    "default_strip",
    "kronecker_oracle",
    "kronecker_witness",
    "phase_error",
    "phase_target",
    "sup_distance",
    "tau_scan",
    "validate_margin",
]
