"""Prime-sum functionals: pretentious distances, M(x;T), H1, H2, H2' and the Halasz bound.

All functionals are built from two trigonometric prime sums over ``p <= x``::

    C(t) = sum cos(t log p)/p,      S(t) = sum Re(f(p) p^{-it})/p

Minimisation over ``t`` uses a coarse grid of spacing ``kappa/log x`` followed
by golden-section refinement around the best grid point (see
:func:`halasz_lab._numerics.grid_refine_min`).  Grid curves use blocked
matrix products; the value reported at the optimum is re-evaluated with a
correctly rounded sum.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from ._numerics import accurate_sum, grid_refine_min
from .errors import InvalidArgumentError, OutOfRangeError, UnsupportedForComplexError
from .multfun import FunctionSpec, ValueTable
from .primes import PrimeTable

KAPPA = 0.25
T_CAP = 1e6
_CHUNK_ELEMS = 1 << 22
_ANCHOR = 256


@dataclass(frozen=True, eq=False)
class PrimeSample:
    """Primes p <= x with log p, 1/p and f(p) split into real and imaginary parts."""

    x: float
    primes: np.ndarray
    logp: np.ndarray
    inv: np.ndarray
    fr: np.ndarray
    fi: np.ndarray

    @property
    def is_complex(self) -> bool:
        return bool(np.any(self.fi != 0))

    def restrict(self, lo: float = 0.0, hi: float | None = None) -> "PrimeSample":
        """Sub-sample lo < p <= hi."""
        hi = self.x if hi is None else hi
        i = np.searchsorted(self.primes, lo, side="right")
        j = np.searchsorted(self.primes, hi, side="right")
        return PrimeSample(min(hi, self.x), self.primes[i:j], self.logp[i:j], self.inv[i:j],
                           self.fr[i:j], self.fi[i:j])

    def trig_sums(self, ts) -> tuple[np.ndarray, np.ndarray]:
        """(C(t), S(t)) on an array of t, by blocked matrix products."""
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        if ts.shape[0] >= 64:
            steps = np.diff(ts)
            if np.all(np.abs(steps - steps[0]) <= 1e-12 * max(1.0, abs(steps[0]))):
                return self._trig_sums_uniform(ts[0], float(steps.mean()), ts.shape[0])
        C = np.empty(ts.shape)
        S = np.empty(ts.shape)
        P = max(1, self.primes.shape[0])
        w = np.stack([self.inv, self.fr * self.inv], axis=1)
        cplx = self.is_complex
        wi = self.fi * self.inv
        step = max(1, _CHUNK_ELEMS // P)
        for a in range(0, ts.shape[0], step):
            arg = np.outer(ts[a:a + step], self.logp)
            cs = np.cos(arg) @ w
            C[a:a + step] = cs[:, 0]
            S[a:a + step] = cs[:, 1]
            if cplx:
                S[a:a + step] += np.sin(arg) @ wi
        return C, S

    def _trig_sums_uniform(self, t0: float, h: float, count: int) -> tuple[np.ndarray, np.ndarray]:
        # rotate p^{it} by p^{ih} step by step, re-anchoring every _ANCHOR steps
        C = np.empty(count)
        S = np.empty(count)
        wc = self.inv
        wr, wi = self.fr * self.inv, self.fi * self.inv
        rot = np.exp(1j * h * self.logp)
        for a in range(0, count, _ANCHOR):
            z = np.exp(1j * (t0 + a * h) * self.logp)
            for j in range(a, min(a + _ANCHOR, count)):
                C[j] = z.real @ wc
                S[j] = z.real @ wr + z.imag @ wi
                z *= rot
        return C, S

    def trig_sums_exact(self, t: float) -> tuple[float, float]:
        c = np.cos(t * self.logp)
        s_terms = self.fr * c
        if self.is_complex:
            s_terms = s_terms + self.fi * np.sin(t * self.logp)
        return float(accurate_sum(c * self.inv)), float(accurate_sum(s_terms * self.inv))

    @property
    def recip_sum(self) -> float:
        return float(accurate_sum(self.inv))


def prime_sample(src, x: float, table: PrimeTable | None = None) -> PrimeSample:
    """Collect f(p), p <= x from a ValueTable, or from a FunctionSpec plus PrimeTable."""
    if isinstance(src, PrimeSample):
        if x > src.x:
            raise OutOfRangeError(f"x = {x} exceeds the sample range {src.x}")
        return src.restrict(0.0, x)
    if isinstance(src, ValueTable):
        if x > src.limit:
            raise OutOfRangeError(f"x = {x} exceeds the materialized limit {src.limit}")
        ps = src.table.primes_in(0, x)
        fp = src.values[ps]
    elif isinstance(src, FunctionSpec):
        if table is None:
            raise InvalidArgumentError("a FunctionSpec source needs a PrimeTable")
        table.check(x, "x")
        ps = table.primes_in(0, x)
        fp = src.prime_values(ps, np.arange(ps.shape[0]))
    else:
        raise InvalidArgumentError(f"unsupported source {type(src).__name__}")
    fp = np.asarray(fp)
    pf = ps.astype(np.float64)
    return PrimeSample(float(x), ps, np.log(pf), 1.0 / pf, np.real(fp).astype(np.float64),
                       np.imag(fp).astype(np.float64) if np.iscomplexobj(fp) else np.zeros(ps.shape))


def _t_range(sample: PrimeSample, T: float) -> tuple[float, float]:
    # for real f every functional here is even in t
    return (-T, T) if sample.is_complex else (0.0, T)


def _spacing(x: float, kappa: float) -> float:
    return kappa / math.log(max(x, 3.0))


def _check_real(sample: PrimeSample, what: str) -> None:
    if sample.is_complex:
        raise UnsupportedForComplexError(f"{what} is defined for real-valued f only")


# ---------------------------------------------------------------------------
# distances

def pretentious_distance(src, t: float, x: float, reference: str = "n_it", table: PrimeTable | None = None) -> float:
    """D(f, n^{it}; x)^2, or D(f, lambda n^{it}; x)^2 with ``reference="liouville"``."""
    s = prime_sample(src, x, table)
    _, S = s.trig_sums_exact(t)
    if reference == "n_it":
        return max(0.0, s.recip_sum - S)
    if reference == "liouville":
        return max(0.0, s.recip_sum + S)
    raise InvalidArgumentError(f"unknown reference {reference!r}")


def min_distance_over_t(src, x: float, T: float, kappa: float = KAPPA, tol: float = 1e-6,
                        table: PrimeTable | None = None, reference: str = "n_it"):
    """(t*, min_{|t| <= T} D^2); D^2 is even in t for real f so t* >= 0 there."""
    if T < 0:
        raise InvalidArgumentError("T must be non-negative")
    s = prime_sample(src, x, table)
    sign = -1.0 if reference == "n_it" else 1.0
    base = s.recip_sum
    lo, hi = _t_range(s, min(T, T_CAP))

    def curve(ts):
        return base + sign * s.trig_sums(ts)[1]

    t_star, _, _ = grid_refine_min(curve, lo, hi, _spacing(x, kappa), tol)
    return t_star, max(0.0, base + sign * s.trig_sums_exact(t_star)[1])


def M_functional(src, x: float, T: float, kappa: float = KAPPA, tol: float = 1e-6,
                 table: PrimeTable | None = None, return_t: bool = False):
    """M(x;T) = min_{|t| <= T} sum_{p<=x} (1 - f(p)) cos(t log p)/p (may be negative)."""
    s = prime_sample(src, x, table)
    _check_real(s, "M(x;T)")
    if T < 0:
        raise InvalidArgumentError("T must be non-negative")

    def curve(ts):
        C, S = s.trig_sums(ts)
        return C - S

    t_star, _, _ = grid_refine_min(curve, 0.0, min(T, T_CAP), _spacing(x, kappa), tol)
    C, S = s.trig_sums_exact(t_star)
    return (C - S, t_star) if return_t else C - S


def H1(src, y: float, kappa: float = KAPPA, tol: float = 1e-6, table: PrimeTable | None = None) -> float:
    """max_{|t| <= 1/2} exp(sum_{p<=y} Re((f(p) - 1) p^{-it})/p)."""
    if y < 2:
        raise InvalidArgumentError("y must be >= 2")
    s = prime_sample(src, y, table)
    lo, hi = _t_range(s, 0.5)

    def curve(ts):
        C, S = s.trig_sums(ts)
        return C - S

    t_star, _, _ = grid_refine_min(curve, lo, hi, _spacing(y, kappa), tol)
    C, S = s.trig_sums_exact(t_star)
    return math.exp(S - C)


def _window_max(s: PrimeSample, k: int, spacing: float, tol: float) -> float:
    """max over |t - k| <= 1/2 of S(t) on the sample."""
    if s.primes.shape[0] == 0:
        return 0.0
    t_star, _, _ = grid_refine_min(lambda ts: -s.trig_sums(ts)[1], k - 0.5, k + 0.5, spacing, tol)
    return s.trig_sums_exact(t_star)[1]


def _k_sum(term, k_max: int) -> float:
    total = 0.0
    terms = []
    for k in range(1, k_max + 1):
        v = term(k)
        terms.append(v)
        total += v
        if k > 1 and v < 1e-15 * total:
            break
    return math.fsum(terms)


def H2(src, y: float, T: float, kappa: float = KAPPA, tol: float = 1e-6, table: PrimeTable | None = None) -> float:
    """(sum_{1<=k<=T-1/2} (log 2k)^4/k^2 max_{|t-k|<=1/2} exp(2 S(t)))^{1/2}."""
    if y < 2 or T < 1:
        raise InvalidArgumentError("need y >= 2 and T >= 1")
    s = prime_sample(src, y, table)
    sp = _spacing(y, kappa)
    k_max = int(math.floor(min(T, T_CAP) - 0.5))
    sq = _k_sum(lambda k: math.log(2 * k) ** 4 / k ** 2 * math.exp(2 * _window_max(s, k, sp, tol)), k_max)
    return math.sqrt(sq)


def y_k(k: int) -> float:
    return math.exp(math.log(2 * k) ** 2)


def H2prime(src, y: float, T: float, kappa: float = KAPPA, tol: float = 1e-6, table: PrimeTable | None = None) -> float:
    """(sum_{1<=k<=T} (log 2k)^6/k^2 exp(2 max_{|t-k|<=1/2} sum_{y_k<p<=y} f(p)cos(t log p)/p))^{1/2}."""
    if y < 2 or T < 1:
        raise InvalidArgumentError("need y >= 2 and T >= 1")
    s = prime_sample(src, y, table)
    sp = _spacing(y, kappa)
    k_max = int(math.floor(min(T, T_CAP)))

    def term(k):
        sub = s.restrict(y_k(k), y)
        return math.log(2 * k) ** 6 / k ** 2 * math.exp(2 * _window_max(sub, k, sp, tol))

    return math.sqrt(_k_sum(term, k_max))


def halasz_gs_bound(src, x: float, T: float, kappa: float = KAPPA, table: PrimeTable | None = None) -> float:
    """x (1 + D) e^{-D} + x/T with D = min_{|t|<=T} D(f, n^{it}; x)^2."""
    if T < 1:
        raise InvalidArgumentError("T must be >= 1")
    _, D = min_distance_over_t(src, x, T, kappa, table=table)
    return x * (1.0 + D) * math.exp(-D) + x / T


# ---------------------------------------------------------------------------
# Hall-Tenenbaum type residuals

def _phi_builtin(name: str, theta: float | None = None) -> Callable[[np.ndarray], np.ndarray]:
    if name == "cos":
        return np.cos
    if name == "neg_cos":
        return lambda u: np.where(np.cos(u) < 0, np.abs(np.cos(u)), 0.0)
    if name == "indicator":
        if theta is None:
            raise InvalidArgumentError("indicator needs theta")

        def ind(u):
            v = u / (2 * math.pi)
            return (np.abs(v - np.round(v)) <= theta).astype(float)
        return ind
    raise InvalidArgumentError(f"unknown phi {name!r}")


def phi_mean(phi: Callable[[np.ndarray], np.ndarray], points: int = 4096) -> float:
    """(1/2pi) int_0^{2pi} phi by the trapezoid rule on one period."""
    u = np.arange(points) * (2 * math.pi / points)
    return float(accurate_sum(phi(u)) / points)


def hall_tenenbaum_residual(phi, t: float, w: float, z: float, table: PrimeTable, theta: float | None = None) -> float:
    """sum_{w<p<=z} phi(t log p)/p - mean(phi) log(log z/log w).

    ``phi`` is ``"cos"``, ``"neg_cos"`` (|cos| on cos < 0), ``"indicator"``
    (``||u/2pi|| <= theta``) or any 2pi-periodic vectorised callable.
    """
    if t == 0:
        raise InvalidArgumentError("t must be non-zero")
    if not 2 <= w < z:
        raise InvalidArgumentError("need 2 <= w < z")
    table.check(z, "z")
    fn = _phi_builtin(phi, theta) if isinstance(phi, str) else phi
    p = table.primes_in(w, z).astype(np.float64)
    lhs = float(accurate_sum(fn(t * np.log(p)) / p)) if p.size else 0.0
    return lhs - phi_mean(fn) * math.log(math.log(z) / math.log(w))


# ---------------------------------------------------------------------------
# diagnostics for the section-6/8 converse

@dataclass
class Section6Diagnostics:
    x: float
    v: float
    delta: float
    eps: float
    sum_fp_ge_minus_delta_over_p: float
    condition_fplus1: bool
    W: float
    dist_liouville: float


def section6_diagnostics(src, x: float, delta: float, v: float, eps: float = math.log(1.5),
                         table: PrimeTable | None = None) -> Section6Diagnostics:
    if not 0 < delta < 1:
        raise InvalidArgumentError("delta must lie in (0, 1)")
    s = prime_sample(src, x, table)
    sub = s.restrict(x ** (1.0 / v), x)
    mask = sub.fr >= -delta
    total = float(accurate_sum(sub.inv[mask]))
    w = v / (1.0 - delta)
    W = w ** w * math.log(math.log(x)) ** (1.0 / (1.0 - delta))
    dist = pretentious_distance(s, 0.0, x, "liouville")
    return Section6Diagnostics(x, v, delta, eps, total, total >= 1.0 + eps, W, dist)


# ---------------------------------------------------------------------------
# report

@dataclass
class FunctionalReport:
    x: float
    T: float
    dist_min: tuple
    M_xT: float | None
    H1: float
    H2: float | None
    H2prime: float | None
    hal_gs_bound: float
    dist_liouville: float
    grid_spacing: float
    T_capped: bool = False
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["dist_min"] = {"t": self.dist_min[0], "value": self.dist_min[1]}
        return d


def functional_report(src, x: float, T: float, kappa: float = KAPPA, table: PrimeTable | None = None,
                      with_H2: bool = True) -> FunctionalReport:
    s = prime_sample(src, x, table)
    notes = []
    capped = T > T_CAP
    if capped:
        notes.append(f"T capped at {T_CAP:g}")
    Te = min(T, T_CAP)
    dmin = min_distance_over_t(s, x, Te, kappa)
    M = None if s.is_complex else M_functional(s, x, Te, kappa)
    if s.is_complex:
        notes.append("M(x;T) is undefined for complex f")
    h2 = H2(s, x, Te, kappa) if with_H2 and Te >= 1 else None
    h2p = H2prime(s, x, Te, kappa) if with_H2 and Te >= 1 else None
    bound = x * (1.0 + dmin[1]) * math.exp(-dmin[1]) + x / Te if Te >= 1 else float("nan")
    return FunctionalReport(x, T, dmin, M, H1(s, x, kappa), h2, h2p, bound,
                            pretentious_distance(s, 0.0, x, "liouville"), _spacing(x, kappa), capped, notes)


__all__ = ["PrimeSample", "prime_sample", "pretentious_distance", "min_distance_over_t", "M_functional",
           "H1", "H2", "H2prime", "y_k", "halasz_gs_bound", "hall_tenenbaum_residual", "phi_mean",
           "section6_diagnostics", "Section6Diagnostics", "FunctionalReport", "functional_report"]
