"""Searches for small values of L_f(x) over completely multiplicative f.

* ``brute_force_delta_pm``: every ±1 pattern on the primes <= x (Walsh-Hadamard).
* ``greedy_delta_pm``: fix the primes <= sqrt(x) by a seed, then give each
  larger prime the sign ``-sign(L_f(x/p))``.
* ``coordinate_refine_real``: cyclic coordinate descent over f(p) in [-1, 1],
  using that L_f(x) is a polynomial in f(p) of degree floor(log x/log p).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._numerics import accurate_sum, golden_section_min
from .errors import InvalidArgumentError
from .multfun import FunctionSpec, custom, extend_completely_multiplicative, format_custom
from .primes import PrimeTable
from .random_model import all_pattern_log_sums

TIE_TOL = 1e-12


@dataclass
class SearchResult:
    x: int
    method: str
    value: float
    minimizer: FunctionSpec
    certificate: int | None = None
    history: list = field(default_factory=list)

    def prime_values(self):
        return [p for p, _ in self.minimizer.values], [v for _, v in self.minimizer.values]

    def custom_text(self) -> str:
        ps, vs = self.prime_values()
        return format_custom(ps, vs, header=f"{self.method} minimizer at x = {self.x}, L_f(x) = {self.value!r}")


def _log_sum_from_primes(x: int, table: PrimeTable, ps: np.ndarray, vals: np.ndarray) -> float:
    dtype = np.int8 if np.all(np.isin(vals, (-1, 0, 1))) else np.float64
    f = extend_completely_multiplicative(table.spf, ps, vals.astype(dtype), x, dtype)
    return float(accurate_sum(f[1:] / np.arange(1, x + 1, dtype=np.float64)))


def brute_force_delta_pm(x: int, table: PrimeTable) -> SearchResult:
    """Exact minimum of L_f(x) over all ±1 patterns (pi(x) <= 22).

    Ties within 1e-12 go to the lexicographically smallest sign vector
    (f(2), f(3), ...) with -1 < +1.
    """
    ps, L = all_pattern_log_sums(x, table)
    k = ps.shape[0]
    best = L.min()
    cands = np.flatnonzero(L <= best + TIE_TOL)
    bits = ((cands[:, None] >> np.arange(k)[None, :]) & 1).astype(np.int8)
    signs = 1 - 2 * bits
    order = np.lexsort(signs.T[::-1]) if k else np.array([0])
    chosen = signs[order[0]] if k else np.zeros(0, dtype=np.int8)
    spec = custom(dict(zip(ps.tolist(), chosen.tolist())))
    value = _log_sum_from_primes(int(x), table, ps, chosen) if k else 1.0
    return SearchResult(int(x), "brute_pm", value, spec, certificate=1 << k)


def seed_values(name: str | Callable, ps: np.ndarray, x: int, v: float = 4.0) -> np.ndarray:
    """Values on the primes <= sqrt(x) for a named seed pattern.

    ``all_minus``: -1 everywhere (f = lambda on sqrt(x)-smooth n).
    ``liouville_like``: -1 on p <= x^{1/v}, +1 on x^{1/v} < p <= sqrt(x).
    ``all_plus``: +1 everywhere.  A callable maps the prime array to values.
    """
    if callable(name):
        return np.asarray(name(ps), dtype=np.float64)
    if name == "all_minus":
        return -np.ones(ps.shape)
    if name == "all_plus":
        return np.ones(ps.shape)
    if name == "liouville_like":
        return np.where(ps <= x ** (1.0 / v), -1.0, 1.0)
    raise InvalidArgumentError(f"unknown seed pattern {name!r}")


def greedy_delta_pm(x: int, table: PrimeTable, smooth_seed="all_minus", v: float = 4.0) -> SearchResult:
    """Seed the primes <= sqrt(x), then f(p) = -sign(L_f(x/p)) for sqrt(x) < p <= x.

    ``x/p < sqrt(x)`` so each L_f(x/p) only involves seeded primes and the
    large-prime choices do not interact.  sign(0) = +1, so a tie gives f(p) = -1.
    """
    x = int(x)
    table.check(x, "x")
    r = math.isqrt(x)
    ps = table.primes_in(0, x)
    small, large = ps[ps <= r], ps[ps > r]
    sv = seed_values(smooth_seed, small, x, v)
    if np.any(np.abs(sv) != 1):
        raise InvalidArgumentError("greedy seeds must be ±1-valued")
    if r >= 1:
        fs = extend_completely_multiplicative(table.spf, small, sv.astype(np.int8), r, np.int8)
        Ls = np.concatenate([[0.0], np.cumsum(fs[1:] / np.arange(1, r + 1, dtype=np.float64))])
        lv = np.where(Ls[x // large] >= 0.0, -1, 1)
    else:
        lv = -np.ones(large.shape)
    vals = np.concatenate([sv, lv]).astype(np.int8)
    spec = custom(dict(zip(ps.tolist(), vals.tolist())))
    label = smooth_seed if isinstance(smooth_seed, str) else "custom"
    return SearchResult(x, "greedy_pm", _log_sum_from_primes(x, table, ps, vals), spec,
                        history=[{"seed": label, "v": v}])


def _ord_split(p: int, x: int, spf) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Multiples n = p^k m <= x (k >= 1, p not dividing m): (n, k, m)."""
    n = np.arange(p, x + 1, p, dtype=np.int64)
    k = np.ones(n.shape, dtype=np.int64)
    m = n // p
    while True:
        div = (m % p) == 0
        if not div.any():
            break
        m = np.where(div, m // p, m)
        k += div
    return n, k, m


def coordinate_refine_real(x: int, start: FunctionSpec, table: PrimeTable, sweeps: int = 10, grid: int = 41,
                           fixed: dict | None = None, tol: float = 1e-12) -> SearchResult:
    """Cyclic coordinate descent on L_f(x) over f(p) in [-1, 1].

    For each prime p the objective is the exact polynomial
    ``A_0 + sum_k A_k a^k`` with ``A_k = sum f(m)/(p^k m)`` over ``p^k m <= x``,
    ``p`` not dividing ``m``.  It is minimised over a grid of ``grid`` points
    plus the endpoints and then by golden section around the best point; a move
    is accepted only if it lowers the objective, so values never increase.
    """
    x = int(x)
    table.check(x, "x")
    if start.is_complex:
        raise InvalidArgumentError("coordinate refinement needs a real start")
    fixed = {int(p): float(v) for p, v in (fixed or {}).items()}
    ps = table.primes_in(0, x)
    a = np.real(start.prime_values(ps, np.arange(ps.shape[0]))).astype(np.float64)
    for p, v in fixed.items():
        a[ps == p] = v
    f = extend_completely_multiplicative(table.spf, ps, a, x, np.float64)
    inv = 1.0 / np.maximum(np.arange(x + 1, dtype=np.float64), 1.0)
    inv[0] = 0.0
    value = float(accurate_sum(f * inv))
    history = [value]
    gpts = np.unique(np.concatenate([np.linspace(-1.0, 1.0, max(grid, 2)), [-1.0, 1.0]]))
    splits = {}
    for _ in range(sweeps):
        before = value
        for i, p in enumerate(ps.tolist()):
            if p in fixed:
                continue
            if p not in splits:
                splits[p] = _ord_split(p, x, table.spf)
            n, k, m = splits[p]
            deg = int(k.max())
            A = np.zeros(deg + 1)
            np.add.at(A, k, f[m] * inv[n])
            A0 = value - float(np.polyval(A[::-1], a[i]))
            A[0] = 0.0

            def poly(t, A=A, A0=A0):
                return A0 + np.polyval(A[::-1], t)

            vals = poly(gpts)
            j = int(np.argmin(vals))
            lo, hi = gpts[max(j - 1, 0)], gpts[min(j + 1, len(gpts) - 1)]
            t_ref, v_ref = golden_section_min(lambda t: float(poly(t)), lo, hi, 1e-12)
            cand, cval = (t_ref, v_ref) if v_ref < vals[j] else (gpts[j], vals[j])
            if cval < value - 1e-15:
                a[i] = cand
                f[n] = f[m] * cand ** k
                value = float(cval)
        # resynchronise the running value with a correctly rounded sum
        value = float(accurate_sum(f * inv))
        history.append(value)
        if before - value < tol:
            break
    if value > history[0]:
        # rounding drift only; fall back to the start point
        a = np.real(start.prime_values(ps, np.arange(ps.shape[0]))).astype(np.float64)
        value = history[0]
    spec = custom(dict(zip(ps.tolist(), a.tolist())))
    return SearchResult(x, "coordinate_real", value, spec, history=history)
